#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cbf/linalg.hpp"

namespace cbf {

struct ParamIndex {
    enum class Kind { Mean, Coefficient };
    Kind kind = Kind::Mean;
    int row = 0;      // 0-based row of Theta (groups first, then covariates)
    int outcome = 0;  // 0-based column of Theta
    int flat = 0;     // index into vec(Theta), column-major
};

/// Identifier table for one model frame.
///
/// Canonical names: mu{j}_{p} and b{l}_{p} (1-based), or mu{j} and b{l} when
/// P = 1. The compact forms mu{j}{p} and b{l}{p} are accepted where they do
/// not clash with a canonical name. Group labels and covariate names work as
/// `label` when P = 1 and as `label.outcome` in general.
class ParameterTable {
public:
    ParameterTable(int J, int L, int P, std::vector<std::string> group_labels = {},
                   std::vector<std::string> covariate_names = {}, std::vector<std::string> outcome_names = {});

    int J() const { return J_; }
    int L() const { return L_; }
    int P() const { return P_; }
    int K() const { return J_ + L_; }
    int size() const { return K() * P_; }

    /// Throws UnknownParameter when the name is missing or ambiguous.
    ParamIndex lookup(std::string_view name) const;
    const std::string& canonical_name(int flat) const { return canonical_[std::size_t(flat)]; }

private:
    void add(const std::string& name, int flat, bool primary);

    int J_, L_, P_;
    std::unordered_map<std::string, int> names_;  // -1 marks an ambiguous name
    std::unordered_map<std::string, bool> primary_;
    std::vector<std::string> canonical_;
};

/// Linear constraints R_E theta = r_E and R_O theta > r_O on theta = vec(Theta).
struct ConstrainedModel {
    std::string name;
    std::string source;
    Matrix re;
    Vector rhs_e;
    Matrix ro;
    Vector rhs_o;
    bool is_complement = false;
    /// Members of a complement; empty means every other model.
    std::vector<std::string> complement_of;
    std::vector<std::string> warnings;

    Eigen::Index equalities() const { return re.rows(); }
    Eigen::Index orders() const { return ro.rows(); }
    bool unconstrained() const { return !is_complement && re.rows() == 0 && ro.rows() == 0; }
};

/// zeta = H theta with H = [R_E; D]. The order constraints on the free block
/// zeta_O read R~_O zeta_O > r~_O once zeta_E = r_E.
struct TransformedModel {
    Matrix h;
    Matrix h_inv;
    Matrix d;
    std::vector<int> free_coords;
    Matrix ro_tilde;
    Vector rhs_o_tilde;
    bool rtilde_full_rank = true;
};

/// Parses one hypothesis. Grammar (see docs/hypotheses.md):
///   hypothesis  = "unconstrained" | complement | relation { "&" relation }
///   complement  = "complement" [ "(" name { "," name } ")" ]
///   relation    = operand rel operand { rel operand }      rel = "=" | ">" | "<"
///   operand     = expr | "(" expr "," expr { "," expr } ")"
///   expr        = [ "+" | "-" ] term { ( "+" | "-" ) term }
///   term        = factor { ( "*" | "/" ) factor } | number factor
///   factor      = number | identifier | "(" expr ")"
ConstrainedModel parse(std::string_view hypothesis, const ParameterTable& names, std::string model_name = {});

TransformedModel derive_transform(const ConstrainedModel& m, int pk);

/// Minimum-norm theta0 with every constraint tight.
Vector boundary_point(const ConstrainedModel& m, int pk);

/// Canonical text form; parses back to identical matrices.
std::string pretty_print(const ConstrainedModel& m, const ParameterTable& names);

/// Largest t <= 1 with R_O theta - r_O >= t for some theta on the equality
/// set (t > 0 means the strict order region is non-empty).
double order_slack(const Matrix& re, const Vector& rhs_e, const Matrix& ro, const Vector& rhs_o);

} // namespace cbf
