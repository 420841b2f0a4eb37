#include "srl/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace srl::num {

namespace {

[[noreturn]] void fail(const char* op, const std::string& msg) {
  throw std::invalid_argument(std::string("tape: ") + op + ": " + msg);
}

void require(bool ok, const char* op, const std::string& msg) {
  if (!ok) fail(op, msg);
}

void require_same_tape(const char* op, std::initializer_list<Val> vs) {
  const Tape* t = nullptr;
  for (Val v : vs) {
    require(v.valid(), op, "invalid value handle");
    if (!t) t = v.tape;
    require(v.tape == t, op, "operands from different tapes");
  }
}

}  // namespace

Val Tape::param(const Tensor& t) {
  auto it = bound_ids_.find(&t);
  if (it != bound_ids_.end()) return Val{this, it->second};
  TapeNode n;
  n.op = Op::Leaf;
  n.bound = &t;
  Val v = emit(std::move(n));
  bound_ids_.emplace(&t, v.id);
  return v;
}

Val Tape::constant(Tensor t) {
  TapeNode n;
  n.op = Op::Leaf;
  n.value = std::move(t);
  return emit(std::move(n));
}

Val Tape::emit(TapeNode node) {
  if (check_finite_ && node.op != Op::Leaf && !node.value.all_finite())
    throw std::runtime_error("tape: non-finite value produced by op " +
                             std::to_string(static_cast<int>(node.op)));
  nodes_.push_back(std::move(node));
  return Val{this, static_cast<int32_t>(nodes_.size() - 1)};
}

const Tensor& Tape::value(Val v) const {
  const TapeNode& n = nodes_.at(static_cast<size_t>(v.id));
  return n.bound ? *n.bound : n.value;
}

const Tensor& Tape::grad(Val v) const {
  const TapeNode& n = nodes_.at(static_cast<size_t>(v.id));
  if (!n.has_grad) throw std::runtime_error("tape: node has no gradient (backward not run?)");
  return n.grad;
}

const Tensor* Tape::grad_of(const Tensor& param) const {
  auto it = bound_ids_.find(&param);
  if (it == bound_ids_.end()) return nullptr;
  const TapeNode& n = nodes_[static_cast<size_t>(it->second)];
  return n.has_grad ? &n.grad : nullptr;
}

Tensor& Tape::ensure_grad(int32_t id) {
  TapeNode& n = nodes_[static_cast<size_t>(id)];
  if (!n.has_grad) {
    const Tensor& v = n.bound ? *n.bound : n.value;
    n.grad = Tensor(v.shape());
    n.has_grad = true;
  }
  return n.grad;
}

void Tape::backward(Val loss) {
  require_same_tape("backward", {loss});
  require(loss.tape == this, "backward", "loss from another tape");
  if (backward_done_) throw std::runtime_error("tape: repeated backward without reset_grads");
  const Tensor& lv = value(loss);
  if (lv.size() != 1) throw std::invalid_argument("tape: backward needs a scalar loss");
  ensure_grad(loss.id).array()(0) = 1.0;
  for (int32_t id = loss.id; id >= 0; --id) {
    if (nodes_[static_cast<size_t>(id)].has_grad) backward_node(id);
  }
  backward_done_ = true;
}

void Tape::reset_grads() {
  for (TapeNode& n : nodes_) {
    n.has_grad = false;
    n.grad = Tensor();
  }
  backward_done_ = false;
}

// ---- builders ------------------------------------------------------------

namespace {

const Tensor& V(Val v) { return v.tape->value(v); }

TapeNode make(Op op, std::initializer_list<Val> in) {
  TapeNode n;
  n.op = op;
  for (Val v : in) n.in.push_back(v.id);
  return n;
}

}  // namespace

Val add(Val a, Val b) {
  require_same_tape("add", {a, b});
  require(V(a).same_shape(V(b)), "add", V(a).shape_str() + " vs " + V(b).shape_str());
  TapeNode n = make(Op::Add, {a, b});
  n.value = Tensor(V(a).shape(), V(a).array() + V(b).array());
  return a.tape->emit(std::move(n));
}

Val sub(Val a, Val b) {
  require_same_tape("sub", {a, b});
  require(V(a).same_shape(V(b)), "sub", V(a).shape_str() + " vs " + V(b).shape_str());
  TapeNode n = make(Op::Sub, {a, b});
  n.value = Tensor(V(a).shape(), V(a).array() - V(b).array());
  return a.tape->emit(std::move(n));
}

Val cmul(Val a, Val b) {
  require_same_tape("cmul", {a, b});
  require(V(a).same_shape(V(b)), "cmul", V(a).shape_str() + " vs " + V(b).shape_str());
  TapeNode n = make(Op::CMul, {a, b});
  n.value = Tensor(V(a).shape(), V(a).array() * V(b).array());
  return a.tape->emit(std::move(n));
}

Val affine_scalar(Val a, double c0, double c1) {
  require_same_tape("affine_scalar", {a});
  TapeNode n = make(Op::AffineScalar, {a});
  n.c0 = c0;
  n.c1 = c1;
  n.value = Tensor(V(a).shape(), c0 * V(a).array() + c1);
  return a.tape->emit(std::move(n));
}

Val matmul(Val a, Val b) {
  require_same_tape("matmul", {a, b});
  require(V(a).rank() <= 2 && V(b).rank() <= 2, "matmul", "rank > 2");
  require(V(a).cols() == V(b).rows(), "matmul", V(a).shape_str() + " * " + V(b).shape_str());
  TapeNode n = make(Op::MatMul, {a, b});
  n.value = Tensor({V(a).rows(), V(b).cols()});
  n.value.mat().noalias() = V(a).mat() * V(b).mat();
  return a.tape->emit(std::move(n));
}

Val transpose(Val a) {
  require_same_tape("transpose", {a});
  require(V(a).rank() <= 2, "transpose", "rank > 2");
  TapeNode n = make(Op::Transpose, {a});
  n.value = Tensor({V(a).cols(), V(a).rows()});
  n.value.mat() = V(a).mat().transpose();
  return a.tape->emit(std::move(n));
}

Val concat_rows(const std::vector<Val>& xs) {
  require(!xs.empty(), "concat_rows", "no inputs");
  require_same_tape("concat_rows", {xs.front()});
  Index cols = V(xs.front()).cols(), rows = 0;
  for (Val x : xs) {
    require(x.tape == xs.front().tape, "concat_rows", "operands from different tapes");
    require(V(x).cols() == cols, "concat_rows", "column mismatch");
    rows += V(x).rows();
  }
  TapeNode n;
  n.op = Op::ConcatRows;
  for (Val x : xs) n.in.push_back(x.id);
  n.value = Tensor({rows, cols});
  Index r = 0;
  for (Val x : xs) {
    n.value.mat().middleRows(r, V(x).rows()) = V(x).mat();
    r += V(x).rows();
  }
  return xs.front().tape->emit(std::move(n));
}

Val concat_cols(const std::vector<Val>& xs) {
  require(!xs.empty(), "concat_cols", "no inputs");
  Index rows = V(xs.front()).rows(), cols = 0;
  for (Val x : xs) {
    require(x.tape == xs.front().tape, "concat_cols", "operands from different tapes");
    require(V(x).rows() == rows, "concat_cols", "row mismatch");
    cols += V(x).cols();
  }
  TapeNode n;
  n.op = Op::ConcatCols;
  for (Val x : xs) n.in.push_back(x.id);
  n.value = Tensor({rows, cols});
  Index c = 0;
  for (Val x : xs) {
    n.value.mat().middleCols(c, V(x).cols()) = V(x).mat();
    c += V(x).cols();
  }
  return xs.front().tape->emit(std::move(n));
}

Val slice_rows(Val a, Index r0, Index len) {
  require_same_tape("slice_rows", {a});
  require(r0 >= 0 && len >= 0 && r0 + len <= V(a).rows(), "slice_rows", "out of range");
  TapeNode n = make(Op::SliceRows, {a});
  n.i0 = r0;
  n.i1 = len;
  n.value = Tensor({len, V(a).cols()});
  n.value.mat() = V(a).mat().middleRows(r0, len);
  return a.tape->emit(std::move(n));
}

Val slice_cols(Val a, Index c0, Index len) {
  require_same_tape("slice_cols", {a});
  require(c0 >= 0 && len >= 0 && c0 + len <= V(a).cols(), "slice_cols", "out of range");
  TapeNode n = make(Op::SliceCols, {a});
  n.i0 = c0;
  n.i1 = len;
  n.value = Tensor({V(a).rows(), len});
  n.value.mat() = V(a).mat().middleCols(c0, len);
  return a.tape->emit(std::move(n));
}

Val append_ones_row(Val a) {
  require_same_tape("append_ones_row", {a});
  TapeNode n = make(Op::AppendOnesRow, {a});
  n.value = Tensor({V(a).rows() + 1, V(a).cols()});
  n.value.mat().topRows(V(a).rows()) = V(a).mat();
  n.value.mat().bottomRows(1).setOnes();
  return a.tape->emit(std::move(n));
}

namespace {

Val elementwise(Op op, Val a, const std::function<double(double)>& f) {
  TapeNode n = make(op, {a});
  n.value = Tensor(V(a).shape(), V(a).array().unaryExpr(f));
  return a.tape->emit(std::move(n));
}

}  // namespace

Val sigmoid(Val a) {
  require_same_tape("sigmoid", {a});
  return elementwise(Op::Sigmoid, a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); });
}

Val tanh_v(Val a) {
  require_same_tape("tanh", {a});
  return elementwise(Op::Tanh, a, [](double x) { return std::tanh(x); });
}

Val relu(Val a) {
  require_same_tape("relu", {a});
  return elementwise(Op::Relu, a, [](double x) { return x > 0.0 ? x : 0.0; });
}

Val log_v(Val a) {
  require_same_tape("log", {a});
  return elementwise(Op::Log, a, [](double x) { return std::log(x); });
}

Val clamp(Val a, double lo, double hi) {
  require_same_tape("clamp", {a});
  require(lo < hi, "clamp", "lo >= hi");
  TapeNode n = make(Op::Clamp, {a});
  n.c0 = lo;
  n.c1 = hi;
  n.value = Tensor(V(a).shape(), V(a).array().max(lo).min(hi));
  return a.tape->emit(std::move(n));
}

Val sum_all(Val a) {
  require_same_tape("sum_all", {a});
  TapeNode n = make(Op::SumAll, {a});
  n.value = Tensor::scalar(V(a).array().sum());
  return a.tape->emit(std::move(n));
}

Val dot_const(Val a, Tensor w) {
  require_same_tape("dot_const", {a});
  require(V(a).same_shape(w), "dot_const", "weight shape mismatch");
  TapeNode n = make(Op::DotConst, {a});
  n.value = Tensor::scalar((V(a).array() * w.array()).sum());
  n.aux = std::move(w);
  return a.tape->emit(std::move(n));
}

Val softmax_last(Val a, Tensor mask) {
  require_same_tape("softmax_last", {a});
  const Tensor& x = V(a);
  require(x.rank() >= 1, "softmax_last", "rank 0");
  if (mask.size() > 0) require(x.same_shape(mask), "softmax_last", "mask shape mismatch");
  const Index L = x.shape().back();
  const Index outer = x.size() / std::max<Index>(L, 1);
  TapeNode n = make(Op::SoftmaxLast, {a});
  n.value = Tensor(x.shape());
  const double* xs = x.array().data();
  const double* ms = mask.size() > 0 ? mask.array().data() : nullptr;
  double* ps = n.value.array().data();
  for (Index o = 0; o < outer; ++o) {
    const double* xr = xs + o * L;
    const double* mr = ms ? ms + o * L : nullptr;
    double* pr = ps + o * L;
    double mx = -std::numeric_limits<double>::infinity();
    for (Index l = 0; l < L; ++l)
      if ((!mr || mr[l] != 0.0) && xr[l] > mx) mx = xr[l];
    double z = 0.0;
    for (Index l = 0; l < L; ++l) {
      if (!mr || mr[l] != 0.0) {
        pr[l] = std::exp(xr[l] - mx);
        z += pr[l];
      } else {
        pr[l] = 0.0;
      }
    }
    if (z > 0.0)
      for (Index l = 0; l < L; ++l) pr[l] /= z;
  }
  n.aux = std::move(mask);
  return a.tape->emit(std::move(n));
}

Val select_rows(Val table, std::vector<Index> rows) {
  require_same_tape("select_rows", {table});
  require(V(table).rank() == 2, "select_rows", "table must be rank 2");
  for (Index r : rows)
    require(r >= 0 && r < V(table).rows(), "select_rows", "row out of range");
  TapeNode n = make(Op::SelectRows, {table});
  n.value = Tensor({static_cast<Index>(rows.size()), V(table).cols()});
  for (size_t i = 0; i < rows.size(); ++i) n.value.mat().row(static_cast<Index>(i)) = V(table).mat().row(rows[i]);
  n.idxs = std::move(rows);
  return table.tape->emit(std::move(n));
}

Val contract_middle(Val w3, Val v) {
  require_same_tape("contract_middle", {w3, v});
  const Tensor& w = V(w3);
  require(w.rank() == 3, "contract_middle", "weights must be rank 3");
  require(V(v).size() == w.dim(1), "contract_middle", "vector length mismatch");
  const Index A = w.dim(0), B = w.dim(1), C = w.dim(2);
  TapeNode n = make(Op::ContractMiddle, {w3, v});
  n.value = Tensor({A, C});
  const double* vv = V(v).array().data();
  for (Index a = 0; a < A; ++a) {
    auto out = n.value.mat().row(a);
    out.setZero();
    for (Index b = 0; b < B; ++b) out += vv[b] * w.slice(a).row(b);
  }
  return w3.tape->emit(std::move(n));
}

Val contract_last(Val w3, Val u) {
  require_same_tape("contract_last", {w3, u});
  const Tensor& w = V(w3);
  require(w.rank() == 3, "contract_last", "weights must be rank 3");
  require(V(u).size() == w.dim(2), "contract_last", "vector length mismatch");
  const Index A = w.dim(0), B = w.dim(1);
  TapeNode n = make(Op::ContractLast, {w3, u});
  n.value = Tensor({A, B});
  CVecMap uv(V(u).array().data(), V(u).size());
  for (Index a = 0; a < A; ++a) n.value.mat().row(a) = (w.slice(a) * uv).transpose();
  return w3.tape->emit(std::move(n));
}

Val symmetrize_upper(Val a) {
  require_same_tape("symmetrize_upper", {a});
  const Tensor& x = V(a);
  require(x.rank() == 2 && x.rows() == x.cols(), "symmetrize_upper", "square matrix required");
  TapeNode n = make(Op::SymmetrizeUpper, {a});
  n.value = Tensor(x.shape());
  const Index m = x.rows();
  for (Index i = 0; i < m; ++i)
    for (Index j = i + 1; j < m; ++j) {
      n.value.at(i, j) = x.at(i, j);
      n.value.at(j, i) = x.at(i, j);
    }
  return a.tape->emit(std::move(n));
}

Val zero_diagonal(Val a) {
  require_same_tape("zero_diagonal", {a});
  const Tensor& x = V(a);
  require(x.rank() == 2 && x.rows() == x.cols(), "zero_diagonal", "square matrix required");
  TapeNode n = make(Op::ZeroDiagonal, {a});
  n.value = x;
  n.value.mat().diagonal().setZero();
  return a.tape->emit(std::move(n));
}

Val stack_first(const std::vector<Val>& slices) {
  require(!slices.empty(), "stack_first", "no inputs");
  const Index r = V(slices.front()).rows(), c = V(slices.front()).cols();
  TapeNode n;
  n.op = Op::StackFirst;
  n.value = Tensor({static_cast<Index>(slices.size()), r, c});
  for (size_t s = 0; s < slices.size(); ++s) {
    require(slices[s].tape == slices.front().tape, "stack_first", "operands from different tapes");
    require(V(slices[s]).rows() == r && V(slices[s]).cols() == c, "stack_first", "shape mismatch");
    n.in.push_back(slices[s].id);
    n.value.slice(static_cast<Index>(s)) = V(slices[s]).mat();
  }
  return slices.front().tape->emit(std::move(n));
}

Val stack_last(const std::vector<Val>& slices) {
  require(!slices.empty(), "stack_last", "no inputs");
  const Index r = V(slices.front()).rows(), c = V(slices.front()).cols();
  const Index k = static_cast<Index>(slices.size());
  TapeNode n;
  n.op = Op::StackLast;
  n.value = Tensor({r, c, k});
  for (Index s = 0; s < k; ++s) {
    Val x = slices[static_cast<size_t>(s)];
    require(x.tape == slices.front().tape, "stack_last", "operands from different tapes");
    require(V(x).rows() == r && V(x).cols() == c, "stack_last", "shape mismatch");
    n.in.push_back(x.id);
    for (Index i = 0; i < r; ++i)
      for (Index j = 0; j < c; ++j) n.value.at3(i, j, s) = V(x).at(i, j);
  }
  return slices.front().tape->emit(std::move(n));
}

Val add_colwise(Val m, Val v) {
  require_same_tape("add_colwise", {m, v});
  require(V(v).cols() == 1 && V(v).rows() == V(m).rows(), "add_colwise", "bias shape mismatch");
  TapeNode n = make(Op::AddColwise, {m, v});
  n.value = Tensor({V(m).rows(), V(m).cols()});
  n.value.mat() = V(m).mat().colwise() + CVecMap(V(v).array().data(), V(v).rows());
  return m.tape->emit(std::move(n));
}

Val so_messages(Val q, Val ssib, Val scop_jik, Val sgrd_jik) {
  require_same_tape("so_messages", {q, ssib, scop_jik, sgrd_jik});
  const Tensor& Q = V(q);
  const Index n1 = Q.rows();
  require(Q.rank() == 2 && Q.cols() == n1, "so_messages", "Q must be square");
  for (const Tensor* t : {&V(ssib), &V(scop_jik), &V(sgrd_jik)})
    require(t->rank() == 3 && t->dim(0) == n1 && t->dim(1) == n1 && t->dim(2) == n1,
            "so_messages", "score tensor shape mismatch");
  const Tensor& sib = V(ssib);
  const Tensor& cop = V(scop_jik);
  const Tensor& grd = V(sgrd_jik);
  TapeNode n = make(Op::SoMessages, {q, ssib, scop_jik, sgrd_jik});
  n.value = Tensor({n1, n1});
  for (Index i = 0; i < n1; ++i) {
    for (Index j = 1; j < n1; ++j) {
      if (i == j) continue;
      double acc = 0.0;
      for (Index k = 0; k < n1; ++k) {
        if (k == i || k == j) continue;
        if (k >= 1) acc += Q.at(i, k) * sib.at3(i, j, k) + Q.at(j, k) * grd.at3(j, i, k);
        acc += Q.at(k, j) * cop.at3(j, i, k);
      }
      n.value.at(i, j) = acc;
    }
  }
  return q.tape->emit(std::move(n));
}

Val bilinear(Val vm, Val w, Val vh) {
  require_same_tape("bilinear", {vm, w, vh});
  return matmul(transpose(append_ones_row(vm)), matmul(w, vh));
}

Val trilinear(Val v1, Val w3, Val v2, Val v3) {
  require_same_tape("trilinear", {v1, w3, v2, v3});
  Val mid = contract_middle(w3, v1);  // (d'+1) x (d'+1)
  return matmul(transpose(append_ones_row(v3)), matmul(mid, append_ones_row(v2)));
}

// ---- backward ------------------------------------------------------------

void Tape::backward_node(int32_t id) {
  TapeNode& n = nodes_[static_cast<size_t>(id)];
  const Tensor& g = n.grad;
  auto in_val = [&](int k) -> const Tensor& {
    const TapeNode& m = nodes_[static_cast<size_t>(n.in[static_cast<size_t>(k)])];
    return m.bound ? *m.bound : m.value;
  };
  auto in_grad = [&](int k) -> Tensor& { return ensure_grad(n.in[static_cast<size_t>(k)]); };

  switch (n.op) {
    case Op::Leaf:
      break;
    case Op::Add:
      in_grad(0).array() += g.array();
      in_grad(1).array() += g.array();
      break;
    case Op::Sub:
      in_grad(0).array() += g.array();
      in_grad(1).array() -= g.array();
      break;
    case Op::CMul:
      in_grad(0).array() += g.array() * in_val(1).array();
      in_grad(1).array() += g.array() * in_val(0).array();
      break;
    case Op::AffineScalar:
      in_grad(0).array() += n.c0 * g.array();
      break;
    case Op::MatMul:
      in_grad(0).mat().noalias() += g.mat() * in_val(1).mat().transpose();
      in_grad(1).mat().noalias() += in_val(0).mat().transpose() * g.mat();
      break;
    case Op::Transpose:
      in_grad(0).mat() += g.mat().transpose();
      break;
    case Op::ConcatRows: {
      Index r = 0;
      for (size_t k = 0; k < n.in.size(); ++k) {
        Tensor& ig = ensure_grad(n.in[k]);
        ig.mat() += g.mat().middleRows(r, ig.rows());
        r += ig.rows();
      }
      break;
    }
    case Op::ConcatCols: {
      Index c = 0;
      for (size_t k = 0; k < n.in.size(); ++k) {
        Tensor& ig = ensure_grad(n.in[k]);
        ig.mat() += g.mat().middleCols(c, ig.cols());
        c += ig.cols();
      }
      break;
    }
    case Op::SliceRows:
      in_grad(0).mat().middleRows(n.i0, n.i1) += g.mat();
      break;
    case Op::SliceCols:
      in_grad(0).mat().middleCols(n.i0, n.i1) += g.mat();
      break;
    case Op::AppendOnesRow:
      in_grad(0).mat() += g.mat().topRows(g.rows() - 1);
      break;
    case Op::Sigmoid:
      in_grad(0).array() += g.array() * n.value.array() * (1.0 - n.value.array());
      break;
    case Op::Tanh:
      in_grad(0).array() += g.array() * (1.0 - n.value.array().square());
      break;
    case Op::Relu:
      in_grad(0).array() += g.array() * (in_val(0).array() > 0.0).cast<double>();
      break;
    case Op::Log:
      in_grad(0).array() += g.array() / in_val(0).array();
      break;
    case Op::Clamp:
      in_grad(0).array() +=
          g.array() * ((in_val(0).array() > n.c0) && (in_val(0).array() < n.c1)).cast<double>();
      break;
    case Op::SumAll:
      in_grad(0).array() += g.array()(0);
      break;
    case Op::DotConst:
      in_grad(0).array() += g.array()(0) * n.aux.array();
      break;
    case Op::SoftmaxLast: {
      Tensor& ig = in_grad(0);
      const Index L = n.value.shape().back();
      const Index outer = n.value.size() / L;
      const double* ps = n.value.array().data();
      const double* gs = g.array().data();
      const double* ms = n.aux.size() > 0 ? n.aux.array().data() : nullptr;
      double* is = ig.array().data();
      for (Index o = 0; o < outer; ++o) {
        const double* p = ps + o * L;
        const double* gr = gs + o * L;
        const double* mr = ms ? ms + o * L : nullptr;
        double* ir = is + o * L;
        double dot = 0.0;
        for (Index l = 0; l < L; ++l)
          if (!mr || mr[l] != 0.0) dot += gr[l] * p[l];
        for (Index l = 0; l < L; ++l)
          if (!mr || mr[l] != 0.0) ir[l] += p[l] * (gr[l] - dot);
      }
      break;
    }
    case Op::SelectRows: {
      Tensor& ig = in_grad(0);
      for (size_t r = 0; r < n.idxs.size(); ++r)
        ig.mat().row(n.idxs[r]) += g.mat().row(static_cast<Index>(r));
      break;
    }
    case Op::ContractMiddle: {
      const Tensor& w = in_val(0);
      const Tensor& v = in_val(1);
      Tensor& gw = in_grad(0);
      Tensor& gv = in_grad(1);
      const Index A = w.dim(0), B = w.dim(1);
      const double* vv = v.array().data();
      double* gvv = gv.array().data();
      for (Index a = 0; a < A; ++a) {
        auto grow = g.mat().row(a);
        for (Index b = 0; b < B; ++b) {
          gw.slice(a).row(b) += vv[b] * grow;
          gvv[b] += (w.slice(a).row(b).array() * grow.array()).sum();
        }
      }
      break;
    }
    case Op::ContractLast: {
      const Tensor& w = in_val(0);
      const Tensor& u = in_val(1);
      Tensor& gw = in_grad(0);
      Tensor& gu = in_grad(1);
      const Index A = w.dim(0);
      CVecMap uv(u.array().data(), u.size());
      VecMap guv(gu.array().data(), gu.size());
      for (Index a = 0; a < A; ++a) {
        auto grow = g.mat().row(a).transpose();
        gw.slice(a).noalias() += grow * uv.transpose();
        guv.noalias() += w.slice(a).transpose() * grow;
      }
      break;
    }
    case Op::SymmetrizeUpper: {
      Tensor& ig = in_grad(0);
      const Index m = g.rows();
      for (Index i = 0; i < m; ++i)
        for (Index j = i + 1; j < m; ++j) ig.at(i, j) += g.at(i, j) + g.at(j, i);
      break;
    }
    case Op::ZeroDiagonal: {
      Tensor& ig = in_grad(0);
      ig.mat() += g.mat();
      ig.mat().diagonal() -= g.mat().diagonal();
      break;
    }
    case Op::StackFirst:
      for (size_t s = 0; s < n.in.size(); ++s)
        ensure_grad(n.in[s]).mat() += g.slice(static_cast<Index>(s));
      break;
    case Op::StackLast: {
      const Index r = g.dim(0), c = g.dim(1), k = g.dim(2);
      for (Index s = 0; s < k; ++s) {
        Tensor& ig = ensure_grad(n.in[static_cast<size_t>(s)]);
        for (Index i = 0; i < r; ++i)
          for (Index j = 0; j < c; ++j) ig.at(i, j) += g.at3(i, j, s);
      }
      break;
    }
    case Op::SoMessages: {
      const Tensor& Q = in_val(0);
      const Tensor& sib = in_val(1);
      const Tensor& cop = in_val(2);
      const Tensor& grd = in_val(3);
      Tensor& gq = in_grad(0);
      Tensor& gsib = in_grad(1);
      Tensor& gcop = in_grad(2);
      Tensor& ggrd = in_grad(3);
      const Index n1 = Q.rows();
      for (Index i = 0; i < n1; ++i) {
        for (Index j = 1; j < n1; ++j) {
          if (i == j) continue;
          const double go = g.at(i, j);
          if (go == 0.0) continue;
          for (Index k = 0; k < n1; ++k) {
            if (k == i || k == j) continue;
            if (k >= 1) {
              gq.at(i, k) += go * sib.at3(i, j, k);
              gsib.at3(i, j, k) += go * Q.at(i, k);
              gq.at(j, k) += go * grd.at3(j, i, k);
              ggrd.at3(j, i, k) += go * Q.at(j, k);
            }
            gq.at(k, j) += go * cop.at3(j, i, k);
            gcop.at3(j, i, k) += go * Q.at(k, j);
          }
        }
      }
      break;
    }
    case Op::AddColwise: {
      in_grad(0).mat() += g.mat();
      VecMap(in_grad(1).array().data(), in_grad(1).rows()) += g.mat().rowwise().sum();
      break;
    }
  }
}

}  // namespace srl::num
