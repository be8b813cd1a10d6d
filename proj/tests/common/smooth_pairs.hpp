#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace testing {

/// A Riemann-Stieltjes test case int_a^b f dg with g continuously
/// differentiable, so the reference is the ordinary integral of f g'.
struct SmoothPair {
  std::string name;
  double a;
  double b;
  std::function<double(double)> f;
  std::function<double(double)> g;
  std::function<double(double)> dg;
};

inline std::vector<SmoothPair> smooth_pairs() {
  using std::cos;
  using std::exp;
  using std::log;
  using std::sin;
  using std::sqrt;
  return {
      {"x dx^2", 0, 1, [](double x) { return x; }, [](double x) { return x * x; },
       [](double x) { return 2 * x; }},
      {"1 d sin", 0, 1, [](double) { return 1.0; }, [](double x) { return sin(x); },
       [](double x) { return cos(x); }},
      {"x^2 dx^3", 0, 1, [](double x) { return x * x; }, [](double x) { return x * x * x; },
       [](double x) { return 3 * x * x; }},
      {"sin d cos", 0, 2, [](double x) { return sin(x); }, [](double x) { return cos(x); },
       [](double x) { return -sin(x); }},
      {"exp d exp", 0, 1, [](double x) { return exp(x); }, [](double x) { return exp(x); },
       [](double x) { return exp(x); }},
      {"x d exp(-x)", 0, 3, [](double x) { return x; }, [](double x) { return exp(-x); },
       [](double x) { return -exp(-x); }},
      {"cos 3x d x^2", 0, 1, [](double x) { return cos(3 * x); }, [](double x) { return x * x; },
       [](double x) { return 2 * x; }},
      {"1/(1+x^2) d x", 0, 2, [](double x) { return 1 / (1 + x * x); }, [](double x) { return x; },
       [](double) { return 1.0; }},
      {"log(1+x) d x^2", 0, 1, [](double x) { return log1p(x); }, [](double x) { return x * x; },
       [](double x) { return 2 * x; }},
      {"x^3 d sin 2x", 0, 1.5, [](double x) { return x * x * x; },
       [](double x) { return sin(2 * x); }, [](double x) { return 2 * cos(2 * x); }},
      {"tanh d tanh", -1, 2, [](double x) { return std::tanh(x); },
       [](double x) { return std::tanh(x); },
       [](double x) { return 1 - std::tanh(x) * std::tanh(x); }},
      {"sqrt(1+x) d log(1+x)", 0, 2, [](double x) { return sqrt(1 + x); },
       [](double x) { return log1p(x); }, [](double x) { return 1 / (1 + x); }},
      {"exp(-x^2) d x^3", -1, 1, [](double x) { return exp(-x * x); },
       [](double x) { return x * x * x; }, [](double x) { return 3 * x * x; }},
      {"sin 5x d sin 5x", 0, 1, [](double x) { return sin(5 * x); },
       [](double x) { return sin(5 * x); }, [](double x) { return 5 * cos(5 * x); }},
      {"2 - x d cos x", 0.5, 2.5, [](double x) { return 2 - x; }, [](double x) { return cos(x); },
       [](double x) { return -sin(x); }},
      {"x^2 + 1 d exp(x/2)", 0, 2, [](double x) { return x * x + 1; },
       [](double x) { return exp(x / 2); }, [](double x) { return exp(x / 2) / 2; }},
      {"cos x d sin 3x", 0, 3, [](double x) { return cos(x); }, [](double x) { return sin(3 * x); },
       [](double x) { return 3 * cos(3 * x); }},
      {"x d atan x", 0, 4, [](double x) { return x; }, [](double x) { return std::atan(x); },
       [](double x) { return 1 / (1 + x * x); }},
      {"exp(x) d x^4", 0, 1, [](double x) { return exp(x); }, [](double x) { return x * x * x * x; },
       [](double x) { return 4 * x * x * x; }},
      {"1/(2+sin x) d sin x", 0, 6, [](double x) { return 1 / (2 + sin(x)); },
       [](double x) { return sin(x); }, [](double x) { return cos(x); }},
      {"x^5 d x^2", 0, 1.2, [](double x) { return std::pow(x, 5); }, [](double x) { return x * x; },
       [](double x) { return 2 * x; }},
      {"sin^2 d cos^2", 0, 1, [](double x) { return sin(x) * sin(x); },
       [](double x) { return cos(x) * cos(x); }, [](double x) { return -2 * sin(x) * cos(x); }},
      {"cosh d x^2", -1, 2, [](double x) { return std::cosh(x); }, [](double x) { return x * x; },
       [](double x) { return 2 * x; }},
      {"x exp(-x) d 1/(1+x)", 0, 3, [](double x) { return x * exp(-x); },
       [](double x) { return 1 / (1 + x); }, [](double x) { return -1 / ((1 + x) * (1 + x)); }},
  };
}

/// int_a^b f g' by composite 16-point Gauss-Legendre on 512 panels.
inline double riemann_stieltjes_reference(const SmoothPair& p) {
  static const double x16[8] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                                0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                                0.9445750230732326, 0.9894009349916499};
  static const double w16[8] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                                0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                                0.0622535239386479, 0.0271524594117541};
  const int panels = 512;
  const double h = (p.b - p.a) / panels;
  double sum = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double mid = p.a + (i + 0.5) * h;
    for (int q = 0; q < 8; ++q) {
      for (double sign : {-1.0, 1.0}) {
        const double x = mid + sign * 0.5 * h * x16[q];
        sum += 0.5 * h * w16[q] * p.f(x) * p.dg(x);
      }
    }
  }
  return sum;
}

}  // namespace testing
