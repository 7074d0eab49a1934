#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace kinspec {

using cplx = std::complex<double>;
using VecR = Eigen::VectorXd;
using VecC = Eigen::VectorXcd;
using MatR = Eigen::MatrixXd;
using MatC = Eigen::MatrixXcd;

inline constexpr cplx I_UNIT{0.0, 1.0};

// All module failures derive from this; `kind` is a short machine tag
// (e.g. "BranchCount", "ContourCrossing") so reports can group them.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& msg)
        : std::runtime_error(kind + ": " + msg), kind_(std::move(kind)) {}
    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

// One line of an audit: what was checked, what was measured, against which bound.
struct Check {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double tolerance = 0.0;
    std::string note;
};

struct AssumptionReport {
    std::vector<Check> checks;
    bool all_passed() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }
    std::vector<Check> failures() const {
        std::vector<Check> out;
        for (const auto& c : checks)
            if (!c.passed) out.push_back(c);
        return out;
    }
};

int thread_count();
void set_thread_count(int k);

}  // namespace kinspec
