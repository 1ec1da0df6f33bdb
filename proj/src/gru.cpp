#include "cograph/gru.hpp"

#include "cograph/errors.hpp"

namespace cograph {

GruCellParams GruCellParams::init(std::size_t in_dim, std::size_t hidden,
                                  double radius, Rng& rng) {
  GruCellParams p;
  auto w = [&] { return Tensor::uniform_param({in_dim, hidden}, radius, rng); };
  auto u = [&] { return Tensor::uniform_param({hidden, hidden}, radius, rng); };
  auto b = [&] { return Tensor::zeros_param({hidden}); };
  p.wz = w(); p.uz = u(); p.bz = b();
  p.wr = w(); p.ur = u(); p.br = b();
  p.wh = w(); p.uh = u(); p.bh = b();
  return p;
}

std::vector<Tensor> GruCellParams::parameters() const {
  return {wz, uz, bz, wr, ur, br, wh, uh, bh};
}

Tensor gru_cell(const Tensor& x, const Tensor& h_prev,
                const GruCellParams& p) {
  if (x.rank() != 1 || x.size() != p.in_dim()) {
    throw ShapeError("gru_cell: input of shape " + shape_str(x.shape()) +
                     " for in_dim " + std::to_string(p.in_dim()));
  }
  if (h_prev.rank() != 1 || h_prev.size() != p.hidden()) {
    throw ShapeError("gru_cell: state of shape " + shape_str(h_prev.shape()) +
                     " for hidden " + std::to_string(p.hidden()));
  }
  Tensor z = sigmoid(add(add(vecmat(x, p.wz), vecmat(h_prev, p.uz)), p.bz));
  Tensor r = sigmoid(add(add(vecmat(x, p.wr), vecmat(h_prev, p.ur)), p.br));
  Tensor cand = tanh(
      add(add(vecmat(x, p.wh), vecmat(mul(r, h_prev), p.uh)), p.bh));
  Tensor keep = add_scalar(mul_scalar(z, -1.0), 1.0);  // 1 - z
  return add(mul(keep, h_prev), mul(z, cand));
}

BiGruParams BiGruParams::init(std::size_t in_dim, std::size_t hidden,
                              double radius, Rng& rng) {
  BiGruParams p;
  p.fwd = GruCellParams::init(in_dim, hidden, radius, rng);
  p.bwd = GruCellParams::init(in_dim, hidden, radius, rng);
  return p;
}

std::vector<Tensor> BiGruParams::parameters() const {
  auto out = fwd.parameters();
  auto b = bwd.parameters();
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

namespace {

const char* const kGateNames[] = {"wz", "uz", "bz", "wr", "ur",
                                  "br", "wh", "uh", "bh"};

void save_cell(Checkpoint& ckpt, const std::string& prefix,
               const GruCellParams& cell) {
  auto params = cell.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    ckpt.put(prefix + kGateNames[i], params[i]);
  }
}

GruCellParams load_cell(const Checkpoint& ckpt, const std::string& prefix) {
  GruCellParams cell;
  Tensor* slots[] = {&cell.wz, &cell.uz, &cell.bz, &cell.wr, &cell.ur,
                     &cell.br, &cell.wh, &cell.uh, &cell.bh};
  for (std::size_t i = 0; i < 9; ++i) {
    *slots[i] = ckpt.take_param(prefix + kGateNames[i]);
  }
  return cell;
}

}  // namespace

void BiGruParams::save_into(Checkpoint& ckpt) const {
  save_cell(ckpt, "gru.fwd.", fwd);
  save_cell(ckpt, "gru.bwd.", bwd);
}

BiGruParams BiGruParams::from_checkpoint(const Checkpoint& ckpt) {
  BiGruParams p;
  p.fwd = load_cell(ckpt, "gru.fwd.");
  p.bwd = load_cell(ckpt, "gru.bwd.");
  return p;
}

}  // namespace cograph
