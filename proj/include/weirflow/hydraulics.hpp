#pragma once

// Weir discharge relation and the empirical discharge-coefficient formulas
// used as algebraic baselines for the learned models.

namespace weirflow::hydraulics {

inline constexpr double kGravity = 9.81;

struct FlowSpec {
  double Q = 0.0;  ///< discharge (m^3/s)
  double B = 0.0;  ///< weir width (m)
  double g = kGravity;
  double h1 = 0.0; ///< upstream head over the crest (m)
  double v = 0.0;  ///< approach velocity (m/s)
  double H1 = 0.0; ///< total head (m)
};

/// Inputs of the stage-discharge correlation. `b` is taken as the channel width
/// and `W1` is a free positive length.
struct CarolloInputs {
  double h1 = 0.0;
  double W = 0.0;
  double L = 0.0;
  double W1 = 0.0;
  double b = 0.0;
  double A = 0.0;
  double a = 0.0;
};

/// H1 = h1 + v^2 / (2 g).
double total_head(double h1, double v, double g = kGravity);

/// Builds a FlowSpec from head and approach velocity, filling H1.
FlowSpec make_flow(double Q, double B, double h1, double v, double g = kGravity);

/// Q = (2/3) Cd B sqrt(2g/3) H1^(3/2).
double discharge_from_cd(double cd, double B, double H1, double g = kGravity);

/// Closed-form inverse of discharge_from_cd.
double cd_from_discharge(double Q, double B, double H1, double g = kGravity);

/// Cd = 1.4 lambda^0.05 [(h1/L)(h1/W)]^0.1
double cd_bagheri(double lambda, double h1, double L, double W);

/// A = Q^(2/3) / (g^(1/3) b^(2/3) W)
double stage_variable_A(double Q, double b, double W, double g = kGravity);

/// a = (2/3) Cd^(2/3)
double coefficient_a(double cd);

/// A = 0.8546 (h1/W)^1.1243 (L/W)^-0.1012 (W1/W)^0.0412
double stage_discharge_A(double h1, double W, double L, double W1);

/// Cd = [(3W / 2h1) * stage_discharge_A(h1, W, L, W1)]^(3/2)
double cd_carollo(double h1, double W, double L, double W1);

} // namespace weirflow::hydraulics
