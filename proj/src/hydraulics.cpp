#include "weirflow/hydraulics.hpp"

#include <cmath>
#include <string>

#include "weirflow/errors.hpp"

namespace weirflow::hydraulics {

namespace {

void require_positive(double value, const char* name, const char* where) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw DomainError(std::string(where) + ": " + name + " must be positive and finite, got " +
                      std::to_string(value));
  }
}

void require_non_negative(double value, const char* name, const char* where) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw DomainError(std::string(where) + ": " + name + " must be non-negative and finite, got " +
                      std::to_string(value));
  }
}

// (2/3) B sqrt(2g/3) H1^(3/2): discharge per unit discharge coefficient.
double unit_discharge(double B, double H1, double g) {
  return (2.0 / 3.0) * B * std::sqrt(2.0 * g / 3.0) * std::pow(H1, 1.5);
}

} // namespace

double total_head(double h1, double v, double g) {
  require_positive(h1, "h1", "total_head");
  require_positive(g, "g", "total_head");
  require_non_negative(v, "v", "total_head");
  return h1 + v * v / (2.0 * g);
}

FlowSpec make_flow(double Q, double B, double h1, double v, double g) {
  require_positive(B, "B", "make_flow");
  require_non_negative(Q, "Q", "make_flow");
  return FlowSpec{Q, B, g, h1, v, total_head(h1, v, g)};
}

double discharge_from_cd(double cd, double B, double H1, double g) {
  require_non_negative(cd, "cd", "discharge_from_cd");
  require_positive(B, "B", "discharge_from_cd");
  require_positive(H1, "H1", "discharge_from_cd");
  require_positive(g, "g", "discharge_from_cd");
  return cd * unit_discharge(B, H1, g);
}

double cd_from_discharge(double Q, double B, double H1, double g) {
  require_non_negative(Q, "Q", "cd_from_discharge");
  require_positive(B, "B", "cd_from_discharge");
  require_positive(H1, "H1", "cd_from_discharge");
  require_positive(g, "g", "cd_from_discharge");
  return Q / unit_discharge(B, H1, g);
}

double cd_bagheri(double lambda, double h1, double L, double W) {
  require_positive(lambda, "lambda", "cd_bagheri");
  require_positive(h1, "h1", "cd_bagheri");
  require_positive(L, "L", "cd_bagheri");
  require_positive(W, "W", "cd_bagheri");
  return 1.4 * std::pow(lambda, 0.05) * std::pow((h1 / L) * (h1 / W), 0.1);
}

double stage_variable_A(double Q, double b, double W, double g) {
  require_non_negative(Q, "Q", "stage_variable_A");
  require_positive(b, "b", "stage_variable_A");
  require_positive(W, "W", "stage_variable_A");
  require_positive(g, "g", "stage_variable_A");
  return std::cbrt(Q * Q) / (std::cbrt(g) * std::cbrt(b * b) * W);
}

double coefficient_a(double cd) {
  require_non_negative(cd, "cd", "coefficient_a");
  return (2.0 / 3.0) * std::cbrt(cd * cd);
}

double stage_discharge_A(double h1, double W, double L, double W1) {
  require_positive(h1, "h1", "stage_discharge_A");
  require_positive(W, "W", "stage_discharge_A");
  require_positive(L, "L", "stage_discharge_A");
  require_positive(W1, "W1", "stage_discharge_A");
  return 0.8546 * std::pow(h1 / W, 1.1243) * std::pow(L / W, -0.1012) * std::pow(W1 / W, 0.0412);
}

double cd_carollo(double h1, double W, double L, double W1) {
  const double A = stage_discharge_A(h1, W, L, W1);
  return std::pow((3.0 * W / (2.0 * h1)) * A, 1.5);
}

} // namespace weirflow::hydraulics
