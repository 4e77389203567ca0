#pragma once

#include <cstdint>

#include "micsel/scene.hpp"

namespace micsel {

// Per-microphone activation in [0, 1]. Beamforming operations accept only
// boolean selections; relaxed values are used by the convex relaxations.
class SelectionVector {
 public:
  SelectionVector() = default;
  explicit SelectionVector(RVector p);

  static SelectionVector all(int m);
  static SelectionVector none(int m);
  static SelectionVector from_indices(int m, const IndexSet& idx);

  int size() const { return static_cast<int>(p_.size()); }
  const RVector& values() const { return p_; }
  double operator[](int i) const { return p_(i); }
  bool is_boolean() const;
  // Number of nonzero entries.
  int count() const;
  // Indices with p_i == 1; throws when the selection is not boolean.
  IndexSet indices() const;
  double cost(const CostVector& costs) const;

 private:
  RVector p_;
};

struct BeamformerWeights {
  CVector w;
  IndexSet selected;
};

// MVDR weights on the selected microphones: R_p^{-1} a_p / (a_p^H R_p^{-1} a_p).
BeamformerWeights mvdr_weights(const SpectralModel& model, const SelectionVector& sel);

// (a_p^H R_nn,p^{-1} a_p)^{-1}.
double output_noise_power(const SpectralModel& model, const SelectionVector& sel);

// P_s a_p^H R_nn,p^{-1} a_p.
double output_snr(const SpectralModel& model, const SelectionVector& sel);

// Output noise power with every microphone active.
double full_noise_power(const SpectralModel& model);

// a_S^H R_nn,S^{-1} a_S for an index set (the inverse of the output noise
// power); zero for the empty set.
double mvdr_precision(const SpectralModel& model, const IndexSet& idx);

// Q = G^{-1} - G^{-1} (G^{-1} + diag(p) / lambda)^{-1} G^{-1}. Accepts relaxed p.
CMatrix rearranged_q(double lambda, const CMatrix& g, const SelectionVector& sel);

// Q = Phi_p^T (lambda I + Phi_p G Phi_p^T)^{-1} Phi_p, i.e. Phi^T R_nn,p^{-1} Phi
// embedded back into M x M. Boolean selections only.
CMatrix selection_q(double lambda, const CMatrix& g, const SelectionVector& sel);

// Growing-set MVDR precision via Cholesky row appends. Evaluating a
// candidate costs O(K^2) for a current set of size K.
class IncrementalMvdr {
 public:
  explicit IncrementalMvdr(const SpectralModel& model);

  // a_S^H R_S^{-1} a_S for the current set S.
  double precision() const { return precision_; }
  // Precision of S + {i}; i must not be a member.
  double precision_with(int i) const;
  void add(int i);
  bool contains(int i) const;
  const std::vector<int>& members() const { return members_; }
  int size() const { return static_cast<int>(members_.size()); }
  // Multiply-add count spent in triangular solves so far.
  std::uint64_t operation_count() const { return ops_; }

 private:
  struct Extension {
    CVector column;
    double diag;
    cplx whitened;
  };
  Extension extend(int i) const;

  const SpectralModel* model_;
  std::vector<int> members_;
  std::vector<char> member_flag_;
  CMatrix chol_;     // lower factor, leading size() x size() block valid
  CVector whitened_; // L^{-1} a_S
  double precision_ = 0.0;
  mutable std::uint64_t ops_ = 0;
};

}  // namespace micsel
