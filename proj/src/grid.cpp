#include "vorstab/grid.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vorstab {

Grid::Grid(Real a, Index nr, Index ntheta) : a_(a), nr_(nr), ntheta_(ntheta) {
  if (!(a >= Real(0)) || a >= Real(1))
    throw std::invalid_argument("grid: inner radius must satisfy 0 <= a < 1");
  if (nr < 4) throw std::invalid_argument("grid: nr must be at least 4");
  if (ntheta < 8 || ntheta % 2 != 0)
    throw std::invalid_argument("grid: ntheta must be even and at least 8");
  dr_ = (Real(1) - a_) / Real(nr_);
  dtheta_ = Real(2) * pi / Real(ntheta_);
  radii_.resize(nr_);
  ring_measure_.resize(nr_);
  for (Index j = 0; j < nr_; ++j) {
    radii_[j] = r(j);
    ring_measure_[j] = radii_[j] * dr_ * dtheta_;
  }
  // Midpoint quadrature of r dr is exact, so this equals pi(1-a^2) to roundoff.
  total_measure_ = ring_measure_.sum() * Real(ntheta_);
}

void require_match(const Grid& g, const ScalarField& f, const char* where) {
  if (!f.matches(g))
    throw std::invalid_argument(std::string(where) +
                                ": field does not match grid layout");
}

Real integrate(const Grid& g, const ScalarField& f) {
  require_match(g, f, "integrate");
  return (f.values.colwise() * g.ring_measure().array()).sum();
}

Real inner(const Grid& g, const ScalarField& f, const ScalarField& h) {
  require_match(g, f, "inner");
  require_match(g, h, "inner");
  return ((f.values * h.values).colwise() * g.ring_measure().array()).sum();
}

Real lp_norm(const Grid& g, const ScalarField& f, Real p) {
  require_match(g, f, "lp_norm");
  if (!(p >= Real(1)) || !std::isfinite(p))
    throw std::invalid_argument("lp_norm: requires 1 <= p < inf");
  if (p == Real(2)) {
    Real s = ((f.values * f.values).colwise() * g.ring_measure().array()).sum();
    return std::sqrt(s);
  }
  Real s =
      (f.values.abs().pow(p).colwise() * g.ring_measure().array()).sum();
  return std::pow(s, Real(1) / p);
}

Real mean(const Grid& g, const ScalarField& f) {
  return integrate(g, f) / g.total_measure();
}

Real moment_of_inertia(const Grid& g, const ScalarField& f) {
  require_match(g, f, "moment_of_inertia");
  Vector w = g.ring_measure().cwiseProduct(g.radii().cwiseAbs2());
  return (f.values.colwise() * w.array()).sum();
}

ScalarField sample(const Grid& g, Real (*fn)(Real, Real)) {
  return sample_with(g, fn);
}

ScalarField shift_theta(const Grid& g, const ScalarField& f, Index sectors) {
  require_match(g, f, "shift_theta");
  ScalarField out(g);
  const Index n = g.ntheta();
  Index s = ((sectors % n) + n) % n;
  // out(theta) = f(theta + s dtheta), the same direction as spectral rotate.
  for (Index k = 0; k < n; ++k) out.values.col(k) = f.values.col((k + s) % n);
  return out;
}

void write_field_csv(const std::string& path, const Grid& g,
                     const ScalarField& f) {
  require_match(g, f, "write_field_csv");
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw std::runtime_error("write_field_csv: cannot open " + path);
  std::fprintf(fp, "# a=%.17g nr=%lld ntheta=%lld\n", g.a(),
               static_cast<long long>(g.nr()),
               static_cast<long long>(g.ntheta()));
  std::fprintf(fp, "j,k,r,theta,value\n");
  for (Index j = 0; j < g.nr(); ++j)
    for (Index k = 0; k < g.ntheta(); ++k)
      std::fprintf(fp, "%lld,%lld,%.17g,%.17g,%.17g\n",
                   static_cast<long long>(j), static_cast<long long>(k),
                   g.r(j), g.theta(k), f.values(j, k));
  if (std::fclose(fp) != 0)
    throw std::runtime_error("write_field_csv: close failed for " + path);
}

namespace {

Real parse_header_value(const std::string& header, const std::string& key) {
  auto pos = header.find(key + "=");
  if (pos == std::string::npos)
    throw std::runtime_error("field csv: malformed header, missing " + key);
  return std::strtod(header.c_str() + pos + key.size() + 1, nullptr);
}

}  // namespace

std::pair<Grid, ScalarField> read_field_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_field_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
    throw std::runtime_error("read_field_csv: missing `# a=...` header in " +
                             path);
  const Real a = parse_header_value(line, "a");
  const Index nr = static_cast<Index>(parse_header_value(line, "nr"));
  const Index ntheta = static_cast<Index>(parse_header_value(line, "ntheta"));
  Grid g(a, nr, ntheta);
  ScalarField f(g);
  ArrayRT seen = ArrayRT::Zero(nr, ntheta);
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (std::isalpha(static_cast<unsigned char>(line[0]))) continue;  // column header
    long long j = 0, k = 0;
    double r = 0, theta = 0, value = 0;
    if (std::sscanf(line.c_str(), "%lld,%lld,%lf,%lf,%lf", &j, &k, &r, &theta,
                    &value) != 5)
      throw std::runtime_error("read_field_csv: malformed row: " + line);
    if (j < 0 || j >= nr || k < 0 || k >= ntheta)
      throw std::runtime_error("read_field_csv: index out of range: " + line);
    f.values(j, k) = value;
    seen(j, k) = Real(1);
  }
  if (seen.sum() != Real(nr * ntheta))
    throw std::runtime_error("read_field_csv: incomplete field in " + path);
  return {g, std::move(f)};
}

ScalarField read_field_csv(const std::string& path, const Grid& expect) {
  auto [g, f] = read_field_csv(path);
  if (!g.same_layout(expect))
    throw std::runtime_error("read_field_csv: grid header of " + path +
                             " does not match the expected layout");
  return std::move(f);
}

}  // namespace vorstab
