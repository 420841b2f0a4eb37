#pragma once

#include "srl/tensor.hpp"

#include <cstdint>
#include <deque>
#include <functional>
#include <unordered_map>
#include <vector>

namespace srl::num {

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
struct Val {
  Tape* tape = nullptr;
  int32_t id = -1;
  bool valid() const { return tape != nullptr && id >= 0; }
};

enum class Op : uint8_t {
  Leaf,
  Add,
  Sub,
  CMul,
  AffineScalar,
  MatMul,
  Transpose,
  ConcatRows,
  ConcatCols,
  SliceRows,
  SliceCols,
  AppendOnesRow,
  Sigmoid,
  Tanh,
  Relu,
  Log,
  Clamp,
  SumAll,
  DotConst,
  SoftmaxLast,
  SelectRows,
  ContractMiddle,
  ContractLast,
  SymmetrizeUpper,
  ZeroDiagonal,
  StackFirst,
  StackLast,
  SoMessages,
  AddColwise,
};

/// One recorded operation: inputs, cached forward value, gradient accumulator.
struct TapeNode {
  Op op = Op::Leaf;
  std::vector<int32_t> in;
  Tensor value;              // owned forward value (empty for bound parameters)
  Tensor grad;               // lazily allocated
  bool has_grad = false;
  Tensor aux;                // constant payload (dot weights, softmax mask)
  std::vector<Index> idxs;   // row indices for SelectRows
  Index i0 = 0, i1 = 0;      // slice offset/length
  double c0 = 0.0, c1 = 0.0; // affine/clamp constants
  const Tensor* bound = nullptr;  // external parameter backing a leaf
};

/// Append-only computation tape. Ops evaluate eagerly; backward() walks the
/// nodes in reverse creation order, which is a reverse topological order.
class Tape {
 public:
  /// Trainable leaf bound to external storage. Repeated calls with the same
  /// tensor return the same node so its gradient accumulates in one place.
  Val param(const Tensor& t);
  /// Non-trainable leaf owned by the tape.
  Val constant(Tensor t);

  const Tensor& value(Val v) const;
  const Tensor& grad(Val v) const;
  /// Gradient of a bound parameter, or nullptr if it never joined the tape
  /// or received no gradient.
  const Tensor* grad_of(const Tensor& param) const;

  /// Reverse sweep from a scalar loss. Throws on a second call without
  /// reset_grads() in between.
  void backward(Val loss);
  void reset_grads();

  size_t size() const { return nodes_.size(); }
  void set_check_finite(bool on) { check_finite_ = on; }

  // Op builders (used through the free functions below).
  Val emit(TapeNode node);

 private:
  friend struct TapeOps;
  std::deque<TapeNode> nodes_;  // deque: value references stay valid as nodes append
  std::unordered_map<const Tensor*, int32_t> bound_ids_;
  bool backward_done_ = false;
  bool check_finite_ = true;

  Tensor& ensure_grad(int32_t id);
  void backward_node(int32_t id);
};

// ---- primitive ops ------------------------------------------------------

Val add(Val a, Val b);
Val sub(Val a, Val b);
Val cmul(Val a, Val b);
/// c0 * x + c1, elementwise.
Val affine_scalar(Val a, double c0, double c1);
Val matmul(Val a, Val b);
Val transpose(Val a);
Val concat_rows(const std::vector<Val>& xs);
Val concat_cols(const std::vector<Val>& xs);
Val slice_rows(Val a, Index r0, Index len);
Val slice_cols(Val a, Index c0, Index len);
Val append_ones_row(Val a);
Val sigmoid(Val a);
Val tanh_v(Val a);
Val relu(Val a);
Val log_v(Val a);
Val clamp(Val a, double lo, double hi);
Val sum_all(Val a);
/// Frozen-weight inner product: sum(a .* w), w constant.
Val dot_const(Val a, Tensor w);
/// Softmax over the last axis; entries where mask==0 get probability exactly
/// zero and receive no gradient. Empty mask means all permitted.
Val softmax_last(Val a, Tensor mask);
/// Gather rows of a table; backward scatter-adds.
Val select_rows(Val table, std::vector<Index> rows);
/// out[a][c] = sum_b W[a][b][c] * v[b]
Val contract_middle(Val w3, Val v);
/// out[a][b] = sum_c W[a][b][c] * u[c]
Val contract_last(Val w3, Val u);
/// Mirror the strict upper triangle onto the lower; zero the diagonal.
Val symmetrize_upper(Val a);
Val zero_diagonal(Val a);
/// Stack k equal-shape matrices into [k][r][c].
Val stack_first(const std::vector<Val>& slices);
/// Stack k equal-shape matrices into [r][c][k].
Val stack_last(const std::vector<Val>& slices);
/// M + v replicated over columns.
Val add_colwise(Val m, Val v);

/// Second-order message matrix for the mean-field update. Q is the masked
/// posterior over candidate edges (head x modifier); ssib is indexed
/// [head i][modifier j][partner k], scop and sgrd are stacked per modifier j
/// as [j][i][k]. Partners k == i, k == j are excluded; Root (k = 0) joins
/// only the co-parent term since it can never be a modifier.
Val so_messages(Val q, Val ssib, Val scop_jik, Val sgrd_jik);

// ---- composites ----------------------------------------------------------

inline Val operator+(Val a, Val b) { return add(a, b); }
inline Val operator-(Val a, Val b) { return sub(a, b); }
inline Val neg(Val a) { return affine_scalar(a, -1.0, 0.0); }
inline Val one_minus(Val a) { return affine_scalar(a, -1.0, 1.0); }

/// [vm ; 1]^T W vh with W of shape (d+1) x d.
Val bilinear(Val vm, Val w, Val vh);
/// [v3 ; 1]^T v1^T W' [v2 ; 1] with W' of shape (d'+1) x d' x (d'+1):
/// the augmented v3 contracts the first axis, v1 the middle, augmented v2
/// the last.
Val trilinear(Val v1, Val w3, Val v2, Val v3);

}  // namespace srl::num
