#pragma once

#include "binfilt/piecewise.hpp"

namespace binfilt {

/// Orthonormal basis of ran Q_k for one split: each function is supported on
/// the split atom and stored as its polynomial restrictions to the two
/// children (small child first).
struct LocalFrame {
    int split_index = 0;
    AtomId atom = kNoAtom;
    std::vector<std::pair<Poly, Poly>> functions;
};

/// Assembled local orthonormal system Phi with the L^p renormalization Psi
/// (psi = phi / ||phi||_p, psi* = ||phi||_p phi).
struct SystemPhi {
    const Filtration* filt = nullptr;
    SpaceSpec space;
    double p = 2.0;
    std::vector<Poly> level0;                       // orthonormal basis of S(Omega)
    std::vector<double> level0_p_norms;
    std::vector<LocalFrame> frames;                 // frames[k-1] belongs to split k
    std::vector<std::vector<double>> frame_p_norms;

    int function_count() const;
};

LocalFrame build_frame(const Filtration& f, const SpaceSpec& S, int split_k);
SystemPhi build_system(const Filtration& f, const SpaceSpec& S, double p);

/// Closed-form generalized Haar function of a split atom (Constant space):
/// values on the small and large child.
std::pair<double, double> haar_explicit_values(double measure_small, double measure_large);
std::pair<Poly, Poly> haar_explicit(const Filtration& f, AtomId A);

/// phi- and psi*-coefficients of a piecewise-polynomial function.
struct Coefficients {
    std::vector<double> level0_phi;
    std::vector<std::vector<double>> split_phi;  // [k-1][frame index]

    const SystemPhi* system = nullptr;
    double psi_dual(int split, int idx) const;  // <f, psi*> = ||phi||_p <f, phi>
    double sum_sq() const;
};

Coefficients analyze(const LeafFunction& g, const SystemPhi& system);

struct CoefEntry {
    int split = 0;  // 0 = level-0 block
    int index = 0;
    AtomId atom = kNoAtom;
    double phi_coef = 0.0;
    double psi_dual_coef = 0.0;
};
std::vector<CoefEntry> flatten(const Coefficients& coefs);

/// Blockwise L^2 projection onto S(F_n); n = -1 gives the zero function.
LeafFunction project_P(const LeafFunction& g, int n, const Filtration& f, const SpaceSpec& S);
/// Atoms of the sigma-algebra F_n (leaves of the tree truncated after split n).
std::vector<AtomId> atoms_at_step(const Filtration& f, int n);

/// Q_k g assembled from frame coefficients.
LeafFunction apply_Q(const LeafFunction& g, const SystemPhi& system, int split_k);

struct QNormResult {
    double value = 0.0;              // ||Q_k f||_p
    double equivalence_ratio = 0.0;  // ||Q_k f||_p / (|T|^{1/p-1/2} ||Q_k f||_2)
};
QNormResult q_norm(const LeafFunction& g, const SystemPhi& system, int split_k, double p);

}  // namespace binfilt
