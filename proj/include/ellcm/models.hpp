#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ellcm/elliptic.hpp"
#include "ellcm/rootsys.hpp"

namespace ellcm {

using cd = std::complex<double>;

enum class ModelKind { AVector, SimplyLaced, BCShort, TwistedBC, SpinSL, SpinSimplyLaced };
enum class FlowMode { Isospectral, Isomonodromic };

std::string kind_name(ModelKind k);
std::optional<ModelKind> parse_kind(const std::string& s);
std::string mode_name(FlowMode m);
std::optional<FlowMode> parse_mode(const std::string& s);

/// Bare coupling constants; each model reads only its own fields.
struct Couplings {
  cd g;                    // AVector, SimplyLaced
  cd g_m, g_l, g_s;        // BCShort
  cd g_l1, g_l2, g_s1, g_s2;  // TwistedBC (g_m shared with BCShort)
};

/// Squared renormalized couplings that enter the Hamiltonian.
struct EffectiveCouplings {
  cd gs_sq;   // BCShort: g_s² + g_s g_l / 2
  cd gl2_sq;  // TwistedBC
  cd gs1_sq;
  cd gs2_sq;
};

EffectiveCouplings renormalize(ModelKind kind, const Couplings& bare);

/// g_a² multiplying ℘(q_j + ω_a) in the Inozemtsev form of the twisted model.
std::array<cd, 4> inozemtsev_map(const Couplings& twisted);

/// Coefficient · ℘_scale(weight · q).
struct PotentialTerm {
  Eigen::VectorXd weight;
  PeriodScale scale;
  cd coef;
};

/// Off-diagonal kernel entry: L += l_coef x(weight·q, z_scale z), M += m_coef y(...).
struct KernelTerm {
  Eigen::Index row, col;
  Eigen::VectorXd weight;
  KernelVariant variant;
  double z_scale;
  cd l_coef, m_coef;
};

/// M_{row,row} += coef · ℘_scale(weight · q).
struct DiagonalTerm {
  Eigen::Index row;
  Eigen::VectorXd weight;
  PeriodScale scale;
  cd coef;
};

class ModelSpec {
 public:
  static ModelSpec a_vector(int l, cd g);
  static ModelSpec simply_laced(const RootSystem& rs, cd g);
  static ModelSpec bc_short(int l, cd g_m, cd g_l, cd g_s);
  static ModelSpec twisted_bc(int l, cd g_m, cd g_l1, cd g_l2, cd g_s1, cd g_s2);
  static ModelSpec spin_sl(int l);
  /// Realized through sl(ℓ) matrix units, so the root system must be of type A.
  static ModelSpec spin_simply_laced(const RootSystem& rs);

  ModelKind kind() const { return kind_; }
  /// ℓ for vector, BC and sl(ℓ) models; the root-system rank otherwise.
  int rank() const { return rank_; }
  /// Length of q and p.
  int dimension() const { return dimension_; }
  /// Size of L and M.
  Eigen::Index lax_dimension() const { return static_cast<Eigen::Index>(index_weights_.size()); }
  bool is_spin() const { return kind_ == ModelKind::SpinSL || kind_ == ModelKind::SpinSimplyLaced; }
  /// Root-type Lax pairs have four singular points on the torus.
  bool root_type() const;

  const Couplings& couplings() const { return bare_; }
  const EffectiveCouplings& effective() const { return effective_; }
  const RootSystem* root_system() const { return roots_ ? roots_.get() : nullptr; }

  /// P_bb = w_b · p and Q_bb = w_b · q.
  const std::vector<Eigen::VectorXd>& index_weights() const { return index_weights_; }
  const std::vector<PotentialTerm>& potential() const { return potential_; }
  const std::vector<KernelTerm>& kernel_terms() const { return kernel_terms_; }
  const std::vector<DiagonalTerm>& diagonal_terms() const { return diagonal_terms_; }

  /// SpinSimplyLaced: structure constants N' used by the flow, root index of
  /// α - β (or -1), the matrix-unit position of each root and its basis sign.
  int spin_n(std::size_t a, std::size_t b) const { return spin_n_[a * roots_->size() + b]; }
  int root_difference(std::size_t a, std::size_t b) const {
    return root_diff_[a * roots_->size() + b];
  }
  std::pair<int, int> root_position(std::size_t a) const { return root_pos_[a]; }
  int root_sign(std::size_t a) const { return root_sign_[a]; }
  std::size_t negative_root(std::size_t a) const { return root_neg_[a]; }

  /// Singular points of L(z) in the fundamental cell: 0, or 0, ω₁, ω₂, ω₃.
  std::vector<cd> singular_points(cd tau) const;

 private:
  ModelSpec() = default;
  void finish();

  ModelKind kind_ = ModelKind::AVector;
  int rank_ = 0;
  int dimension_ = 0;
  Couplings bare_{};
  EffectiveCouplings effective_{};
  std::shared_ptr<const RootSystem> roots_;
  std::vector<Eigen::VectorXd> index_weights_;
  std::vector<PotentialTerm> potential_;
  std::vector<KernelTerm> kernel_terms_;
  std::vector<DiagonalTerm> diagonal_terms_;
  std::vector<int> spin_n_, root_diff_, root_sign_;
  std::vector<std::size_t> root_neg_;
  std::vector<std::pair<int, int>> root_pos_;
};

/// Phase-space point. F is ℓ×ℓ for SpinSL and a |Δ|×1 column of F_α for
/// SpinSimplyLaced, where G holds the Cartan components.
struct PhaseState {
  Eigen::VectorXcd q;
  Eigen::VectorXcd p;
  Eigen::MatrixXcd F;
  Eigen::VectorXcd G;

  Eigen::VectorXcd pack() const;
  static PhaseState unpack(const ModelSpec& model, const Eigen::VectorXcd& v);
};

PhaseState make_state(const ModelSpec& model, Eigen::VectorXcd q, Eigen::VectorXcd p,
                      Eigen::MatrixXcd F = {});

/// Shapes and the spin constraint (F_jj = 0, G = 0); throws std::invalid_argument.
void validate_state(const ModelSpec& model, const PhaseState& s, double tol = 1e-10);

/// Largest |F_jj| (SpinSL) or |G| (SpinSimplyLaced); zero otherwise.
double spin_constraint_norm(const ModelSpec& model, const PhaseState& s);

cd hamiltonian(const ModelSpec& model, const PhaseState& s, const Context& ctx);

/// Time derivative of the state along the flow; the isomonodromic flow is the
/// isospectral vector field divided by 2πi, read as d/dτ.
PhaseState eom(const ModelSpec& model, const PhaseState& s, const Context& ctx, FlowMode mode);

struct LaxSample {
  Eigen::MatrixXcd L;
  Eigen::MatrixXcd M;
  cd z;
  cd tau;
  Eigen::Index dimension;
};

LaxSample build_lax(const ModelSpec& model, const PhaseState& s, cd z, const Context& ctx);

/// diag(w_b · q).
Eigen::MatrixXcd q_diagonal(const ModelSpec& model, const PhaseState& s);
Eigen::MatrixXcd p_diagonal(const ModelSpec& model, const PhaseState& s);

struct ResidualConfig {
  double radius = 0.02;  // contour radius in q, z and τ; shrunk by the size of the flow
  int nodes = 24;
};

/// Max-norm of the Lax equation residual. Derivatives are contour averages over
/// `nodes` points on a small circle, the complex analogue of central differences.
double lax_residual(const ModelSpec& model, const PhaseState& s, cd z, const Context& ctx,
                    FlowMode mode, const ResidualConfig& cfg = {});

/// Same with the commutator sign flipped; a harness control that should be large.
double lax_residual_flipped(const ModelSpec& model, const PhaseState& s, cd z,
                            const Context& ctx, FlowMode mode, const ResidualConfig& cfg = {});

struct TranslationResidual {
  double r_alpha;   // ‖L(z+1) - L(z)‖
  double r_beta_L;  // ‖L(z+τ) - e^{2πiQ} L(z) e^{-2πiQ}‖
  double r_beta_M;  // ‖M(z+τ) - e^{2πiQ}(M(z) + 2πi L(z))e^{-2πiQ} + 2πi P‖
  double max() const { return std::max({r_alpha, r_beta_L, r_beta_M}); }
};

TranslationResidual lax_translation_residual(const ModelSpec& model, const PhaseState& s, cd z,
                                             const Context& ctx);

/// Distance from w to the lattice ½Z + (τ/2)Z, which holds every pole used here.
double half_lattice_distance(cd w, cd tau);

/// Random state whose weights w·q all stay `margin` away from the half lattice.
PhaseState random_state(const ModelSpec& model, std::mt19937_64& rng, cd tau,
                        double margin = 0.08);

/// Random spectral parameter in the fundamental cell away from the half lattice.
cd random_z(std::mt19937_64& rng, cd tau, double margin = 0.08);

/// Random modulus with Re τ ∈ [-½, ½] and Im τ ∈ [0.8, 1.2].
cd random_tau(std::mt19937_64& rng);

/// F_jk = i g b_j a_k off the diagonal, F_jj = 0.
Eigen::MatrixXcd spin_minimal_orbit(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b, cd g);

}  // namespace ellcm
