#pragma once

#include <memory>
#include <string>
#include <vector>

#include "memotion/core/error.hpp"
#include "memotion/core/tensor.hpp"
#include "memotion/nn/module.hpp"

namespace memotion::nn {

// Step views over {N, L, D} tensors (row n, time t lives at row n*L + t of
// the 2-D view).
inline Mat gather_step(const Tensor& x, int t) {
    const int n = x.dim(0), l = x.dim(1), d = x.dim(2);
    Mat out(n, d);
    auto x2 = x.mat(n * l, d);
    for (int i = 0; i < n; ++i) out.row(i) = x2.row(i * l + t);
    return out;
}

inline void scatter_step(Tensor& x, int t, const Mat& m) {
    const int n = x.dim(0), l = x.dim(1), d = x.dim(2);
    auto x2 = x.mat(n * l, d);
    for (int i = 0; i < n; ++i) x2.row(i * l + t) = m.row(i);
}

inline Eigen::ArrayXf mask_column(const Mat& mask, int t) { return mask.col(t).array(); }

// Applies per-sample carry-through masking: rows with mask 0 keep prev.
inline Mat masked_update(const Mat& fresh, const Mat& prev, const Eigen::ArrayXf& m) {
    return ((fresh.array().colwise() * m) + (prev.array().colwise() * (1.0f - m))).matrix();
}

namespace detail {
inline Mat sigmoid(const Mat& z) {
    return z.unaryExpr([](float v) { return 1.0f / (1.0f + std::exp(-v)); });
}
}  // namespace detail

// Single-direction LSTM scanned over a padded batch. Padding steps carry
// hidden and cell state through unchanged, so the scan direction can start
// from either end of the buffer.
class LstmDirection : public Module {
public:
    LstmDirection() = default;
    LstmDirection(std::string name, int in_dim, int hidden, bool reverse, Rng& rng)
        : in_dim_(in_dim),
          hidden_(hidden),
          reverse_(reverse),
          wx_(name + ".wx", {4 * hidden, in_dim}),
          wh_(name + ".wh", {4 * hidden, hidden}),
          b_(name + ".b", {4 * hidden}) {
        he_uniform_init(wx_.value, in_dim, rng);
        he_uniform_init(wh_.value, hidden, rng);
        b_.value.set_zero();
        for (int j = hidden; j < 2 * hidden; ++j) b_.value[j] = 1.0f;  // forget gate bias
    }

    void collect_parameters(std::vector<Parameter*>& out) override {
        out.push_back(&wx_);
        out.push_back(&wh_);
        out.push_back(&b_);
    }

    int hidden() const { return hidden_; }

    Tensor forward(const Tensor& x, const Mat& mask) {
        const int n = x.dim(0), l = x.dim(1);
        check(x.dim(2) == in_dim_, "LstmDirection: input dim mismatch");
        x_ = x;
        auto wx = wx_.value.mat(4 * hidden_, in_dim_);
        xp_ = x.mat(n * l, in_dim_) * wx.transpose();

        auto alloc = [&]() { return Tensor({n, l, hidden_}); };
        i_ = alloc(); f_ = alloc(); g_ = alloc(); o_ = alloc();
        tanh_c_ = alloc(); c_ = alloc();
        Tensor h_out({n, l, hidden_});

        auto wh = wh_.value.mat(4 * hidden_, hidden_);
        auto bias = b_.value.mat(1, 4 * hidden_);
        Mat h_prev = Mat::Zero(n, hidden_), c_prev = Mat::Zero(n, hidden_);

        for (int s = 0; s < l; ++s) {
            const int t = reverse_ ? l - 1 - s : s;
            Mat a(n, 4 * hidden_);
            auto xp2 = ConstMatMap(xp_.data(), n * l, 4 * hidden_);
            for (int i = 0; i < n; ++i) a.row(i) = xp2.row(i * l + t);
            a.noalias() += h_prev * wh.transpose();
            a.rowwise() += bias.row(0);

            Mat ig = detail::sigmoid(a.leftCols(hidden_));
            Mat fg = detail::sigmoid(a.middleCols(hidden_, hidden_));
            Mat gg = a.middleCols(2 * hidden_, hidden_).array().tanh().matrix();
            Mat og = detail::sigmoid(a.rightCols(hidden_));
            Mat c_raw = fg.cwiseProduct(c_prev) + ig.cwiseProduct(gg);
            Mat tc = c_raw.array().tanh().matrix();
            Mat h_raw = og.cwiseProduct(tc);

            auto m = mask_column(mask, t);
            Mat c_t = masked_update(c_raw, c_prev, m);
            Mat h_t = masked_update(h_raw, h_prev, m);

            scatter_step(i_, t, ig);
            scatter_step(f_, t, fg);
            scatter_step(g_, t, gg);
            scatter_step(o_, t, og);
            scatter_step(tanh_c_, t, tc);
            scatter_step(c_, t, c_t);
            scatter_step(h_out, t, h_t);
            h_prev = std::move(h_t);
            c_prev = std::move(c_t);
        }
        h_ = h_out;
        mask_ = mask;
        return h_out;
    }

    Tensor backward(const Tensor& dh_seq) {
        const int n = x_.dim(0), l = x_.dim(1);
        auto wh = wh_.value.mat(4 * hidden_, hidden_);
        auto dwh = wh_.grad.mat(4 * hidden_, hidden_);
        auto db = b_.grad.mat(1, 4 * hidden_);

        Mat dxp = Mat::Zero(n * l, 4 * hidden_);
        Mat dh_carry = Mat::Zero(n, hidden_), dc_carry = Mat::Zero(n, hidden_);

        for (int s = l - 1; s >= 0; --s) {
            const int t = reverse_ ? l - 1 - s : s;
            const int t_prev = reverse_ ? l - s : s - 1;  // index of previous processed step
            Mat h_prev = (s == 0) ? Mat::Zero(n, hidden_) : gather_step(h_, t_prev);
            Mat c_prev = (s == 0) ? Mat::Zero(n, hidden_) : gather_step(c_, t_prev);

            Mat ig = gather_step(i_, t), fg = gather_step(f_, t), gg = gather_step(g_, t),
                og = gather_step(o_, t), tc = gather_step(tanh_c_, t);
            auto m = mask_column(mask_, t);

            Mat dh = gather_step(dh_seq, t) + dh_carry;
            Mat dh_raw = (dh.array().colwise() * m).matrix();
            Mat dh_prev = (dh.array().colwise() * (1.0f - m)).matrix();

            Mat dog = dh_raw.cwiseProduct(tc);
            Mat dc_raw = dh_raw.cwiseProduct(og).cwiseProduct(
                             (1.0f - tc.array().square()).matrix()) +
                         (dc_carry.array().colwise() * m).matrix();
            Mat dc_prev = (dc_carry.array().colwise() * (1.0f - m)).matrix() +
                          dc_raw.cwiseProduct(fg);

            Mat dig = dc_raw.cwiseProduct(gg);
            Mat dfg = dc_raw.cwiseProduct(c_prev);
            Mat dgg = dc_raw.cwiseProduct(ig);

            Mat da(n, 4 * hidden_);
            da.leftCols(hidden_) =
                dig.cwiseProduct(ig).cwiseProduct((1.0f - ig.array()).matrix());
            da.middleCols(hidden_, hidden_) =
                dfg.cwiseProduct(fg).cwiseProduct((1.0f - fg.array()).matrix());
            da.middleCols(2 * hidden_, hidden_) =
                dgg.cwiseProduct((1.0f - gg.array().square()).matrix());
            da.rightCols(hidden_) =
                dog.cwiseProduct(og).cwiseProduct((1.0f - og.array()).matrix());

            dwh.noalias() += da.transpose() * h_prev;
            db.row(0) += da.colwise().sum();
            dh_prev.noalias() += da * wh;
            for (int i = 0; i < n; ++i) dxp.row(i * l + t) = da.row(i);

            dh_carry = std::move(dh_prev);
            dc_carry = std::move(dc_prev);
        }

        auto wx = wx_.value.mat(4 * hidden_, in_dim_);
        auto dwx = wx_.grad.mat(4 * hidden_, in_dim_);
        auto x2 = x_.mat(n * l, in_dim_);
        dwx.noalias() += dxp.transpose() * x2;
        Tensor dx({n, l, in_dim_});
        dx.mat(n * l, in_dim_).noalias() = dxp * wx;
        return dx;
    }

private:
    int in_dim_ = 0, hidden_ = 0;
    bool reverse_ = false;
    Parameter wx_, wh_, b_;
    Tensor x_, i_, f_, g_, o_, tanh_c_, c_, h_;
    Mat xp_, mask_;
};

// Single-direction GRU; gate order (r, z, n) with the reset gate applied to
// the recurrent contribution before its matmul.
class GruDirection : public Module {
public:
    GruDirection() = default;
    GruDirection(std::string name, int in_dim, int hidden, bool reverse, Rng& rng)
        : in_dim_(in_dim),
          hidden_(hidden),
          reverse_(reverse),
          wx_(name + ".wx", {3 * hidden, in_dim}),
          wh_(name + ".wh", {3 * hidden, hidden}),
          b_(name + ".b", {3 * hidden}) {
        he_uniform_init(wx_.value, in_dim, rng);
        he_uniform_init(wh_.value, hidden, rng);
        b_.value.set_zero();
    }

    void collect_parameters(std::vector<Parameter*>& out) override {
        out.push_back(&wx_);
        out.push_back(&wh_);
        out.push_back(&b_);
    }

    int hidden() const { return hidden_; }

    Tensor forward(const Tensor& x, const Mat& mask) {
        const int n = x.dim(0), l = x.dim(1);
        check(x.dim(2) == in_dim_, "GruDirection: input dim mismatch");
        x_ = x;
        auto wx = wx_.value.mat(3 * hidden_, in_dim_);
        xp_ = x.mat(n * l, in_dim_) * wx.transpose();

        auto alloc = [&]() { return Tensor({n, l, hidden_}); };
        r_ = alloc(); z_ = alloc(); nn_ = alloc(); rh_ = alloc();
        Tensor h_out({n, l, hidden_});

        auto wh = wh_.value.mat(3 * hidden_, hidden_);
        auto ur = wh.topRows(hidden_);
        auto uz = wh.middleRows(hidden_, hidden_);
        auto un = wh.bottomRows(hidden_);
        auto bias = b_.value.mat(1, 3 * hidden_);
        Mat h_prev = Mat::Zero(n, hidden_);

        for (int s = 0; s < l; ++s) {
            const int t = reverse_ ? l - 1 - s : s;
            Mat ax(n, 3 * hidden_);
            auto xp2 = ConstMatMap(xp_.data(), n * l, 3 * hidden_);
            for (int i = 0; i < n; ++i) ax.row(i) = xp2.row(i * l + t);
            ax.rowwise() += bias.row(0);

            Mat rg = detail::sigmoid(ax.leftCols(hidden_) + h_prev * ur.transpose());
            Mat zg = detail::sigmoid(ax.middleCols(hidden_, hidden_) + h_prev * uz.transpose());
            Mat rh = rg.cwiseProduct(h_prev);
            Mat ng = (ax.rightCols(hidden_) + rh * un.transpose()).array().tanh().matrix();
            Mat h_raw = (1.0f - zg.array()).matrix().cwiseProduct(ng) + zg.cwiseProduct(h_prev);

            auto m = mask_column(mask, t);
            Mat h_t = masked_update(h_raw, h_prev, m);

            scatter_step(r_, t, rg);
            scatter_step(z_, t, zg);
            scatter_step(nn_, t, ng);
            scatter_step(rh_, t, rh);
            scatter_step(h_out, t, h_t);
            h_prev = std::move(h_t);
        }
        h_ = h_out;
        mask_ = mask;
        return h_out;
    }

    Tensor backward(const Tensor& dh_seq) {
        const int n = x_.dim(0), l = x_.dim(1);
        auto wh = wh_.value.mat(3 * hidden_, hidden_);
        auto ur = wh.topRows(hidden_);
        auto uz = wh.middleRows(hidden_, hidden_);
        auto un = wh.bottomRows(hidden_);
        auto dwh = wh_.grad.mat(3 * hidden_, hidden_);
        auto db = b_.grad.mat(1, 3 * hidden_);

        Mat dxp = Mat::Zero(n * l, 3 * hidden_);
        Mat dh_carry = Mat::Zero(n, hidden_);

        for (int s = l - 1; s >= 0; --s) {
            const int t = reverse_ ? l - 1 - s : s;
            const int t_prev = reverse_ ? l - s : s - 1;
            Mat h_prev = (s == 0) ? Mat::Zero(n, hidden_) : gather_step(h_, t_prev);

            Mat rg = gather_step(r_, t), zg = gather_step(z_, t), ng = gather_step(nn_, t),
                rh = gather_step(rh_, t);
            auto m = mask_column(mask_, t);

            Mat dh = gather_step(dh_seq, t) + dh_carry;
            Mat dh_raw = (dh.array().colwise() * m).matrix();
            Mat dh_prev = (dh.array().colwise() * (1.0f - m)).matrix();

            Mat dz = dh_raw.cwiseProduct(h_prev - ng);
            Mat dn = dh_raw.cwiseProduct((1.0f - zg.array()).matrix());
            dh_prev += dh_raw.cwiseProduct(zg);

            Mat dan = dn.cwiseProduct((1.0f - ng.array().square()).matrix());
            Mat drh = dan * un;
            dh_prev += drh.cwiseProduct(rg);
            Mat dr = drh.cwiseProduct(h_prev);

            Mat dar = dr.cwiseProduct(rg).cwiseProduct((1.0f - rg.array()).matrix());
            Mat daz = dz.cwiseProduct(zg).cwiseProduct((1.0f - zg.array()).matrix());

            dwh.topRows(hidden_).noalias() += dar.transpose() * h_prev;
            dwh.middleRows(hidden_, hidden_).noalias() += daz.transpose() * h_prev;
            dwh.bottomRows(hidden_).noalias() += dan.transpose() * rh;
            dh_prev.noalias() += dar * ur + daz * uz;

            Mat da(n, 3 * hidden_);
            da.leftCols(hidden_) = dar;
            da.middleCols(hidden_, hidden_) = daz;
            da.rightCols(hidden_) = dan;
            db.row(0) += da.colwise().sum();
            for (int i = 0; i < n; ++i) dxp.row(i * l + t) = da.row(i);

            dh_carry = std::move(dh_prev);
        }

        auto wx = wx_.value.mat(3 * hidden_, in_dim_);
        auto dwx = wx_.grad.mat(3 * hidden_, in_dim_);
        auto x2 = x_.mat(n * l, in_dim_);
        dwx.noalias() += dxp.transpose() * x2;
        Tensor dx({n, l, in_dim_});
        dx.mat(n * l, in_dim_).noalias() = dxp * wx;
        return dx;
    }

private:
    int in_dim_ = 0, hidden_ = 0;
    bool reverse_ = false;
    Parameter wx_, wh_, b_;
    Tensor x_, r_, z_, nn_, rh_, h_;
    Mat xp_, mask_;
};

// Concatenates a forward and a reverse scan of the same cell type; output
// width is 2 * hidden.
template <class Direction>
class Bidirectional : public Module {
public:
    Bidirectional() = default;
    Bidirectional(std::string name, int in_dim, int hidden, Rng& rng)
        : fwd_(name + ".fwd", in_dim, hidden, false, rng),
          bwd_(name + ".bwd", in_dim, hidden, true, rng),
          hidden_(hidden) {}

    void collect_parameters(std::vector<Parameter*>& out) override {
        fwd_.collect_parameters(out);
        bwd_.collect_parameters(out);
    }

    int out_dim() const { return 2 * hidden_; }

    Tensor forward(const Tensor& x, const Mat& mask) {
        Tensor hf = fwd_.forward(x, mask);
        Tensor hb = bwd_.forward(x, mask);
        const int n = x.dim(0), l = x.dim(1);
        Tensor y({n, l, 2 * hidden_});
        auto y2 = y.mat(n * l, 2 * hidden_);
        y2.leftCols(hidden_) = hf.mat(n * l, hidden_);
        y2.rightCols(hidden_) = hb.mat(n * l, hidden_);
        return y;
    }

    Tensor backward(const Tensor& dy) {
        const int n = dy.dim(0), l = dy.dim(1);
        auto dy2 = dy.mat(n * l, 2 * hidden_);
        Tensor dhf({n, l, hidden_}), dhb({n, l, hidden_});
        dhf.mat(n * l, hidden_) = dy2.leftCols(hidden_);
        dhb.mat(n * l, hidden_) = dy2.rightCols(hidden_);
        Tensor dx = fwd_.backward(dhf);
        Tensor dxb = bwd_.backward(dhb);
        auto a = dx.mat(n * l, dx.dim(2));
        a += dxb.mat(n * l, dxb.dim(2));
        return dx;
    }

private:
    Direction fwd_, bwd_;
    int hidden_ = 0;
};

using BiLstm = Bidirectional<LstmDirection>;
using BiGru = Bidirectional<GruDirection>;

}  // namespace memotion::nn
