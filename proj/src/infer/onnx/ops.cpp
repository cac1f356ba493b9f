// Copyright 2026 The flakelens Authors
// SPDX-License-Identifier: Apache-2.0

// Operator kernels for the ONNX interpreter. Tensors are row-major; spatial
// operators handle 4-D NCHW inputs only.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Core>

#include "value.hpp"

namespace flakelens::infer::onnx_rt {

namespace {

using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using MutMap = Eigen::Map<RowMatrix>;

std::int64_t normalize_axis(const Node& n, std::int64_t axis, std::int64_t rank) {
    if (axis < -rank || axis >= rank) {
        n.fail("axis " + std::to_string(axis) + " out of range for rank " + std::to_string(rank));
    }
    return axis < 0 ? axis + rank : axis;
}

Shape strides_of(const Shape& s) {
    Shape st(s.size(), 1);
    for (std::int64_t i = static_cast<std::int64_t>(s.size()) - 2; i >= 0; --i) {
        st[static_cast<std::size_t>(i)] = st[static_cast<std::size_t>(i + 1)] * s[static_cast<std::size_t>(i + 1)];
    }
    return st;
}

std::int64_t product(const Shape& s, std::size_t begin, std::size_t end) {
    std::int64_t p = 1;
    for (std::size_t i = begin; i < end; ++i) {
        p *= s[i];
    }
    return p;
}

const Value& need(const Node& n, Inputs in, std::size_t i) {
    if (i >= in.size() || in[i] == nullptr) {
        n.fail("missing required input #" + std::to_string(i));
    }
    return *in[i];
}

const Value* optional_input(Inputs in, std::size_t i) {
    if (i >= in.size() || in[i] == nullptr || in[i]->numel() == 0) {
        return nullptr;
    }
    return in[i];
}

const Value& need_float(const Node& n, Inputs in, std::size_t i) {
    const Value& v = need(n, in, i);
    if (v.type != DType::f32) {
        n.fail("input #" + std::to_string(i) + " must be float");
    }
    return v;
}

// ---------------------------------------------------------------- element-wise

Shape broadcast_shape(const Node& n, const Shape& a, const Shape& b) {
    const std::size_t rank = std::max(a.size(), b.size());
    Shape out(rank, 1);
    for (std::size_t i = 0; i < rank; ++i) {
        const std::int64_t da = i < rank - a.size() ? 1 : a[i - (rank - a.size())];
        const std::int64_t db = i < rank - b.size() ? 1 : b[i - (rank - b.size())];
        if (da != db && da != 1 && db != 1) {
            n.fail("cannot broadcast " + shape_string(a) + " with " + shape_string(b));
        }
        out[i] = da == 1 ? db : da;
    }
    return out;
}

// Strides of `s` viewed in an output of rank `rank`, zero on broadcast axes.
Shape broadcast_strides(const Shape& s, const Shape& out) {
    const Shape st = strides_of(s);
    Shape r(out.size(), 0);
    const std::size_t lead = out.size() - s.size();
    for (std::size_t i = 0; i < s.size(); ++i) {
        r[lead + i] = s[i] == 1 ? 0 : st[i];
    }
    return r;
}

template <class T, class Op>
std::vector<T> broadcast_apply(const std::vector<T>& a, const Shape& as, const std::vector<T>& b, const Shape& bs,
                               const Shape& out, Op op) {
    const std::int64_t total = element_count(out);
    std::vector<T> r(static_cast<std::size_t>(total));
    if (as == bs) {
        for (std::size_t k = 0; k < r.size(); ++k) r[k] = op(a[k], b[k]);
        return r;
    }
    if (b.size() == 1) {
        const T bv = b[0];
        if (a.size() == r.size()) {
            for (std::size_t k = 0; k < r.size(); ++k) r[k] = op(a[k], bv);
            return r;
        }
    }
    if (a.size() == 1 && b.size() == r.size()) {
        const T av = a[0];
        for (std::size_t k = 0; k < r.size(); ++k) r[k] = op(av, b[k]);
        return r;
    }
    if (total == 0) {
        return r;
    }
    const Shape sa = broadcast_strides(as, out);
    const Shape sb = broadcast_strides(bs, out);
    const std::size_t rank = out.size();
    const std::int64_t inner = out.back();
    const std::int64_t ia = sa.back(), ib = sb.back();
    Shape idx(rank, 0);
    std::int64_t oa = 0, ob = 0;
    for (std::int64_t base = 0; base < total; base += inner) {
        for (std::int64_t k = 0; k < inner; ++k) {
            r[static_cast<std::size_t>(base + k)] = op(a[static_cast<std::size_t>(oa + k * ia)],
                                                       b[static_cast<std::size_t>(ob + k * ib)]);
        }
        for (std::int64_t d = static_cast<std::int64_t>(rank) - 2; d >= 0; --d) {
            const auto du = static_cast<std::size_t>(d);
            ++idx[du];
            oa += sa[du];
            ob += sb[du];
            if (idx[du] < out[du]) {
                break;
            }
            oa -= sa[du] * idx[du];
            ob -= sb[du] * idx[du];
            idx[du] = 0;
        }
    }
    return r;
}

template <class FOp, class IOp>
Kernel binary(FOp fop, IOp iop) {
    return [fop, iop](const Node& n, Inputs in) {
        const Value& a = need(n, in, 0);
        const Value& b = need(n, in, 1);
        if (a.type != b.type) {
            n.fail("operands have different element types");
        }
        const Shape out = broadcast_shape(n, a.shape, b.shape);
        if (a.type == DType::f32) {
            return std::vector<Value>{Value::floats(out, broadcast_apply(a.f, a.shape, b.f, b.shape, out, fop))};
        }
        return std::vector<Value>{Value::ints(out, broadcast_apply(a.i, a.shape, b.i, b.shape, out, iop))};
    };
}

template <class Op>
Kernel unary(Op op) {
    return [op](const Node& n, Inputs in) {
        Value v = need_float(n, in, 0);
        for (auto& x : v.f) {
            x = op(x);
        }
        return std::vector<Value>{std::move(v)};
    };
}

float sigmoid(float x) { return 1.0f / (1.0f + std::exp(-x)); }

std::vector<Value> clip(const Node& n, Inputs in) {
    Value v = need_float(n, in, 0);
    float lo = -std::numeric_limits<float>::infinity();
    float hi = std::numeric_limits<float>::infinity();
    if (n.opset < 11) {
        lo = n.attr_float("min", lo);
        hi = n.attr_float("max", hi);
    } else {
        if (const Value* m = optional_input(in, 1)) lo = m->as_floats()[0];
        if (const Value* m = optional_input(in, 2)) hi = m->as_floats()[0];
    }
    for (auto& x : v.f) {
        x = std::min(std::max(x, lo), hi);
    }
    return {std::move(v)};
}

std::vector<Value> variadic_extreme(const Node& n, Inputs in, bool take_max) {
    Value acc = need_float(n, in, 0);
    for (std::size_t k = 1; k < in.size(); ++k) {
        const Value& b = need_float(n, in, k);
        const Shape out = broadcast_shape(n, acc.shape, b.shape);
        acc = Value::floats(out, broadcast_apply(acc.f, acc.shape, b.f, b.shape, out, [take_max](float x, float y) {
                                return take_max ? std::max(x, y) : std::min(x, y);
                            }));
    }
    return {std::move(acc)};
}

// ---------------------------------------------------------------- convolution

struct Spatial {
    std::int64_t kh, kw, sh, sw, dh, dw, pt, pl, pb, pr;
};

Spatial spatial_params(const Node& n, std::int64_t in_h, std::int64_t in_w, std::int64_t kh, std::int64_t kw,
                       bool transposed = false) {
    Spatial p{kh, kw, 1, 1, 1, 1, 0, 0, 0, 0};
    const auto strides = n.attr_ints("strides");
    if (strides.size() == 2) {
        p.sh = strides[0];
        p.sw = strides[1];
    }
    const auto dil = n.attr_ints("dilations");
    if (dil.size() == 2) {
        p.dh = dil[0];
        p.dw = dil[1];
    }
    const auto pads = n.attr_ints("pads");
    if (pads.size() == 4) {
        p.pt = pads[0];
        p.pl = pads[1];
        p.pb = pads[2];
        p.pr = pads[3];
    } else if (!pads.empty()) {
        n.fail("only 2-D spatial operators are supported");
    }
    const std::string auto_pad = n.attr_string("auto_pad", "NOTSET");
    if (auto_pad == "VALID") {
        p.pt = p.pl = p.pb = p.pr = 0;
    } else if ((auto_pad == "SAME_UPPER" || auto_pad == "SAME_LOWER") && !transposed) {
        auto same = [&](std::int64_t in, std::int64_t k, std::int64_t s, std::int64_t d, std::int64_t& b,
                        std::int64_t& e) {
            const std::int64_t out = (in + s - 1) / s;
            const std::int64_t total = std::max<std::int64_t>(0, (out - 1) * s + (k - 1) * d + 1 - in);
            b = auto_pad == "SAME_UPPER" ? total / 2 : total - total / 2;
            e = total - b;
        };
        same(in_h, p.kh, p.sh, p.dh, p.pt, p.pb);
        same(in_w, p.kw, p.sw, p.dw, p.pl, p.pr);
    } else if (auto_pad != "NOTSET" && !transposed) {
        n.fail("unsupported auto_pad " + auto_pad);
    }
    return p;
}

std::vector<Value> conv(const Node& n, Inputs in) {
    const Value& x = need_float(n, in, 0);
    const Value& w = need_float(n, in, 1);
    const Value* bias = optional_input(in, 2);
    if (x.rank() != 4 || w.rank() != 4) {
        n.fail("Conv supports 4-D input and weights only");
    }
    const std::int64_t batch = x.shape[0], c = x.shape[1], h = x.shape[2], wd = x.shape[3];
    const std::int64_t m = w.shape[0], cg = w.shape[1], kh = w.shape[2], kw = w.shape[3];
    const std::int64_t group = n.attr_int("group", 1);
    if (group <= 0 || c != cg * group || m % group != 0) {
        n.fail("channel/group mismatch: input " + shape_string(x.shape) + " weights " + shape_string(w.shape));
    }
    const Spatial p = spatial_params(n, h, wd, kh, kw);
    const std::int64_t oh = (h + p.pt + p.pb - ((kh - 1) * p.dh + 1)) / p.sh + 1;
    const std::int64_t ow = (wd + p.pl + p.pr - ((kw - 1) * p.dw + 1)) / p.sw + 1;
    if (oh <= 0 || ow <= 0) {
        n.fail("empty convolution output");
    }
    const std::int64_t mg = m / group;
    const std::int64_t k_rows = cg * kh * kw;
    const std::int64_t cols = oh * ow;
    std::vector<float> out(static_cast<std::size_t>(batch * m * cols));
    const bool pointwise = kh == 1 && kw == 1 && p.sh == 1 && p.sw == 1 && p.pt == 0 && p.pl == 0 && p.pb == 0 &&
                           p.pr == 0;
    std::vector<float> col;
    if (!pointwise) {
        col.resize(static_cast<std::size_t>(k_rows * cols));
    }
    for (std::int64_t b = 0; b < batch; ++b) {
        for (std::int64_t g = 0; g < group; ++g) {
            const float* xin = x.f.data() + (b * c + g * cg) * h * wd;
            const float* src = xin;
            if (!pointwise) {
                for (std::int64_t ci = 0; ci < cg; ++ci) {
                    for (std::int64_t ky = 0; ky < kh; ++ky) {
                        for (std::int64_t kx = 0; kx < kw; ++kx) {
                            float* row = col.data() + ((ci * kh + ky) * kw + kx) * cols;
                            for (std::int64_t oy = 0; oy < oh; ++oy) {
                                const std::int64_t iy = oy * p.sh - p.pt + ky * p.dh;
                                float* dst = row + oy * ow;
                                if (iy < 0 || iy >= h) {
                                    std::fill(dst, dst + ow, 0.0f);
                                    continue;
                                }
                                const float* srow = xin + (ci * h + iy) * wd;
                                for (std::int64_t ox = 0; ox < ow; ++ox) {
                                    const std::int64_t ix = ox * p.sw - p.pl + kx * p.dw;
                                    dst[ox] = (ix >= 0 && ix < wd) ? srow[ix] : 0.0f;
                                }
                            }
                        }
                    }
                }
                src = col.data();
            }
            const ConstMap wm(w.f.data() + g * mg * k_rows, mg, k_rows);
            const ConstMap xm(src, k_rows, cols);
            MutMap om(out.data() + (b * m + g * mg) * cols, mg, cols);
            om.noalias() = wm * xm;
        }
        if (bias) {
            for (std::int64_t oc = 0; oc < m; ++oc) {
                float* dst = out.data() + (b * m + oc) * cols;
                const float bv = bias->f[static_cast<std::size_t>(oc)];
                for (std::int64_t k = 0; k < cols; ++k) dst[k] += bv;
            }
        }
    }
    return {Value::floats({batch, m, oh, ow}, std::move(out))};
}

std::vector<Value> conv_transpose(const Node& n, Inputs in) {
    const Value& x = need_float(n, in, 0);
    const Value& w = need_float(n, in, 1);
    const Value* bias = optional_input(in, 2);
    if (x.rank() != 4 || w.rank() != 4) {
        n.fail("ConvTranspose supports 4-D input and weights only");
    }
    const std::int64_t batch = x.shape[0], c = x.shape[1], h = x.shape[2], wd = x.shape[3];
    const std::int64_t group = n.attr_int("group", 1);
    const std::int64_t mg = w.shape[1], kh = w.shape[2], kw = w.shape[3];
    const std::int64_t m = mg * group;
    if (w.shape[0] != c || c % group != 0) {
        n.fail("channel/group mismatch: input " + shape_string(x.shape) + " weights " + shape_string(w.shape));
    }
    const std::int64_t cg = c / group;
    Spatial p = spatial_params(n, h, wd, kh, kw, true);
    auto out_pad = n.attr_ints("output_padding", {0, 0});
    if (out_pad.size() != 2) out_pad = {0, 0};
    const auto out_shape = n.attr_ints("output_shape");
    const std::string auto_pad = n.attr_string("auto_pad", "NOTSET");
    if (out_shape.size() >= 2 || auto_pad == "SAME_UPPER" || auto_pad == "SAME_LOWER") {
        const std::int64_t th = out_shape.size() >= 2 ? out_shape[out_shape.size() - 2] : h * p.sh;
        const std::int64_t tw = out_shape.size() >= 2 ? out_shape.back() : wd * p.sw;
        auto split = [&](std::int64_t total, std::int64_t& b, std::int64_t& e) {
            total = std::max<std::int64_t>(total, 0);
            if (auto_pad == "SAME_UPPER") {
                b = total / 2;
                e = total - b;
            } else {
                e = total / 2;
                b = total - e;
            }
        };
        split(p.sh * (h - 1) + out_pad[0] + ((kh - 1) * p.dh + 1) - th, p.pt, p.pb);
        split(p.sw * (wd - 1) + out_pad[1] + ((kw - 1) * p.dw + 1) - tw, p.pl, p.pr);
    }
    const std::int64_t oh = p.sh * (h - 1) + out_pad[0] + ((kh - 1) * p.dh + 1) - p.pt - p.pb;
    const std::int64_t ow = p.sw * (wd - 1) + out_pad[1] + ((kw - 1) * p.dw + 1) - p.pl - p.pr;
    if (oh <= 0 || ow <= 0) {
        n.fail("empty transposed-convolution output");
    }
    const std::int64_t hw = h * wd;
    const std::int64_t k_rows = mg * kh * kw;
    std::vector<float> out(static_cast<std::size_t>(batch * m * oh * ow), 0.0f);
    std::vector<float> col(static_cast<std::size_t>(k_rows * hw));
    for (std::int64_t b = 0; b < batch; ++b) {
        for (std::int64_t g = 0; g < group; ++g) {
            const ConstMap wm(w.f.data() + g * cg * k_rows, cg, k_rows);
            const ConstMap xm(x.f.data() + (b * c + g * cg) * hw, cg, hw);
            MutMap cm(col.data(), k_rows, hw);
            cm.noalias() = wm.transpose() * xm;
            for (std::int64_t mo = 0; mo < mg; ++mo) {
                float* dst = out.data() + ((b * m) + g * mg + mo) * oh * ow;
                for (std::int64_t ky = 0; ky < kh; ++ky) {
                    for (std::int64_t kx = 0; kx < kw; ++kx) {
                        const float* row = col.data() + ((mo * kh + ky) * kw + kx) * hw;
                        for (std::int64_t iy = 0; iy < h; ++iy) {
                            const std::int64_t oy = iy * p.sh - p.pt + ky * p.dh;
                            if (oy < 0 || oy >= oh) continue;
                            for (std::int64_t ix = 0; ix < wd; ++ix) {
                                const std::int64_t ox = ix * p.sw - p.pl + kx * p.dw;
                                if (ox < 0 || ox >= ow) continue;
                                dst[oy * ow + ox] += row[iy * wd + ix];
                            }
                        }
                    }
                }
            }
        }
        if (bias) {
            for (std::int64_t oc = 0; oc < m; ++oc) {
                float* dst = out.data() + (b * m + oc) * oh * ow;
                const float bv = bias->f[static_cast<std::size_t>(oc)];
                for (std::int64_t k = 0; k < oh * ow; ++k) dst[k] += bv;
            }
        }
    }
    return {Value::floats({batch, m, oh, ow}, std::move(out))};
}

std::vector<Value> pool(const Node& n, Inputs in, bool is_max) {
    const Value& x = need_float(n, in, 0);
    if (x.rank() != 4) {
        n.fail("pooling supports 4-D input only");
    }
    if (n.outputs.size() > 1 && !n.outputs[1].empty()) {
        n.fail("MaxPool indices output is not supported");
    }
    const auto ks = n.attr_ints("kernel_shape");
    if (ks.size() != 2) {
        n.fail("kernel_shape must have 2 entries");
    }
    const std::int64_t batch = x.shape[0], c = x.shape[1], h = x.shape[2], w = x.shape[3];
    const Spatial p = spatial_params(n, h, w, ks[0], ks[1]);
    const bool ceil_mode = n.attr_int("ceil_mode", 0) != 0;
    const bool include_pad = n.attr_int("count_include_pad", 0) != 0;
    auto extent = [&](std::int64_t in_len, std::int64_t k, std::int64_t s, std::int64_t d, std::int64_t pb,
                      std::int64_t pe) {
        const std::int64_t span = in_len + pb + pe - ((k - 1) * d + 1);
        std::int64_t out = (ceil_mode ? (span + s - 1) / s : span / s) + 1;
        if (ceil_mode && (out - 1) * s >= in_len + pb) {
            --out;
        }
        return out;
    };
    const std::int64_t oh = extent(h, p.kh, p.sh, p.dh, p.pt, p.pb);
    const std::int64_t ow = extent(w, p.kw, p.sw, p.dw, p.pl, p.pr);
    std::vector<float> out(static_cast<std::size_t>(batch * c * oh * ow));
    for (std::int64_t plane = 0; plane < batch * c; ++plane) {
        const float* src = x.f.data() + plane * h * w;
        float* dst = out.data() + plane * oh * ow;
        for (std::int64_t oy = 0; oy < oh; ++oy) {
            for (std::int64_t ox = 0; ox < ow; ++ox) {
                float acc = is_max ? -std::numeric_limits<float>::infinity() : 0.0f;
                std::int64_t count = 0;
                for (std::int64_t ky = 0; ky < p.kh; ++ky) {
                    const std::int64_t iy = oy * p.sh - p.pt + ky * p.dh;
                    for (std::int64_t kx = 0; kx < p.kw; ++kx) {
                        const std::int64_t ix = ox * p.sw - p.pl + kx * p.dw;
                        const bool inside = iy >= 0 && iy < h && ix >= 0 && ix < w;
                        if (inside) {
                            const float v = src[iy * w + ix];
                            acc = is_max ? std::max(acc, v) : acc + v;
                            ++count;
                        } else if (include_pad && iy < h + p.pb && ix < w + p.pr) {
                            ++count;
                        }
                    }
                }
                dst[oy * ow + ox] = is_max ? acc : (count > 0 ? acc / static_cast<float>(count) : 0.0f);
            }
        }
    }
    return {Value::floats({batch, c, oh, ow}, std::move(out))};
}

std::vector<Value> global_average_pool(const Node& n, Inputs in) {
    const Value& x = need_float(n, in, 0);
    if (x.rank() < 3) {
        n.fail("GlobalAveragePool needs rank >= 3");
    }
    const std::int64_t planes = x.shape[0] * x.shape[1];
    const std::int64_t area = product(x.shape, 2, x.shape.size());
    std::vector<float> out(static_cast<std::size_t>(planes));
    for (std::int64_t k = 0; k < planes; ++k) {
        double s = 0.0;
        for (std::int64_t j = 0; j < area; ++j) s += x.f[static_cast<std::size_t>(k * area + j)];
        out[static_cast<std::size_t>(k)] = static_cast<float>(s / static_cast<double>(area));
    }
    Shape shape = x.shape;
    for (std::size_t d = 2; d < shape.size(); ++d) shape[d] = 1;
    return {Value::floats(shape, std::move(out))};
}

// ---------------------------------------------------------------- resize

double source_coordinate(const std::string& mode, std::int64_t o, double scale, std::int64_t in_len,
                         std::int64_t out_len) {
    if (mode == "asymmetric") return o / scale;
    if (mode == "align_corners") return out_len == 1 ? 0.0 : o * static_cast<double>(in_len - 1) / (out_len - 1);
    if (mode == "pytorch_half_pixel") return out_len > 1 ? (o + 0.5) / scale - 0.5 : 0.0;
    if (mode == "tf_half_pixel_for_nearest") return (o + 0.5) / scale;
    return (o + 0.5) / scale - 0.5;  // half_pixel
}

std::int64_t nearest_index(const std::string& mode, double x, std::int64_t in_len) {
    double r;
    if (mode == "floor") {
        r = std::floor(x);
    } else if (mode == "ceil") {
        r = std::ceil(x);
    } else if (mode == "round_prefer_ceil") {
        r = std::floor(x + 0.5);
    } else {  // round_prefer_floor
        r = (x - std::floor(x) == 0.5) ? std::floor(x) : std::round(x);
    }
    return std::clamp<std::int64_t>(static_cast<std::int64_t>(r), 0, in_len - 1);
}

std::vector<Value> resize(const Node& n, Inputs in) {
    const Value& x = need_float(n, in, 0);
    const std::size_t rank = x.shape.size();
    std::vector<double> scales(rank, 1.0);
    Shape out_shape = x.shape;
    const bool legacy = n.op_type == "Upsample" || n.opset < 11;
    const Value* scale_in = nullptr;
    const Value* sizes_in = nullptr;
    if (n.op_type == "Upsample" && n.opset < 9) {
        const auto* a = n.attr("scales");
        if (!a || a->floats.size() != rank) n.fail("Upsample needs per-axis scales");
        for (std::size_t d = 0; d < rank; ++d) scales[d] = a->floats[d];
    } else if (legacy) {
        scale_in = optional_input(in, 1);
    } else {
        scale_in = optional_input(in, 2);
        sizes_in = optional_input(in, 3);
    }
    if (sizes_in) {
        const auto sz = sizes_in->as_ints();
        if (sz.size() != rank) n.fail("sizes must have one entry per axis");
        for (std::size_t d = 0; d < rank; ++d) {
            out_shape[d] = sz[d];
            scales[d] = static_cast<double>(sz[d]) / static_cast<double>(x.shape[d]);
        }
    } else {
        if (scale_in) {
            const auto sc = scale_in->as_floats();
            if (sc.size() != rank) n.fail("scales must have one entry per axis");
            for (std::size_t d = 0; d < rank; ++d) scales[d] = sc[d];
        }
        for (std::size_t d = 0; d < rank; ++d) {
            out_shape[d] = static_cast<std::int64_t>(std::floor(x.shape[d] * scales[d]));
        }
    }
    if (rank != 4) n.fail("Resize supports 4-D input only");
    if (out_shape[0] != x.shape[0] || out_shape[1] != x.shape[1]) n.fail("Resize over batch/channel axes");
    const std::string mode = n.attr_string("mode", "nearest");
    const std::string ctm = legacy ? "asymmetric" : n.attr_string("coordinate_transformation_mode", "half_pixel");
    const std::string nmode = legacy ? "floor" : n.attr_string("nearest_mode", "round_prefer_floor");
    const std::int64_t h = x.shape[2], w = x.shape[3], oh = out_shape[2], ow = out_shape[3];
    const std::int64_t planes = x.shape[0] * x.shape[1];
    std::vector<float> out(static_cast<std::size_t>(planes * oh * ow));
    if (mode == "nearest") {
        std::vector<std::int64_t> ys(static_cast<std::size_t>(oh)), xs(static_cast<std::size_t>(ow));
        for (std::int64_t o = 0; o < oh; ++o)
            ys[static_cast<std::size_t>(o)] = nearest_index(nmode, source_coordinate(ctm, o, scales[2], h, oh), h);
        for (std::int64_t o = 0; o < ow; ++o)
            xs[static_cast<std::size_t>(o)] = nearest_index(nmode, source_coordinate(ctm, o, scales[3], w, ow), w);
        for (std::int64_t pl = 0; pl < planes; ++pl) {
            const float* src = x.f.data() + pl * h * w;
            float* dst = out.data() + pl * oh * ow;
            for (std::int64_t oy = 0; oy < oh; ++oy) {
                const float* srow = src + ys[static_cast<std::size_t>(oy)] * w;
                for (std::int64_t ox = 0; ox < ow; ++ox) dst[oy * ow + ox] = srow[xs[static_cast<std::size_t>(ox)]];
            }
        }
    } else if (mode == "linear" || mode == "bilinear") {
        struct Tap {
            std::int64_t lo, hi;
            float t;
        };
        auto taps = [&](std::int64_t in_len, std::int64_t out_len, double s) {
            std::vector<Tap> r(static_cast<std::size_t>(out_len));
            for (std::int64_t o = 0; o < out_len; ++o) {
                double c = std::clamp(source_coordinate(ctm, o, s, in_len, out_len), 0.0,
                                      static_cast<double>(in_len - 1));
                const auto lo = static_cast<std::int64_t>(std::floor(c));
                r[static_cast<std::size_t>(o)] = {lo, std::min(lo + 1, in_len - 1), static_cast<float>(c - lo)};
            }
            return r;
        };
        const auto ty = taps(h, oh, scales[2]);
        const auto tx = taps(w, ow, scales[3]);
        for (std::int64_t pl = 0; pl < planes; ++pl) {
            const float* src = x.f.data() + pl * h * w;
            float* dst = out.data() + pl * oh * ow;
            for (std::int64_t oy = 0; oy < oh; ++oy) {
                const Tap& a = ty[static_cast<std::size_t>(oy)];
                for (std::int64_t ox = 0; ox < ow; ++ox) {
                    const Tap& b = tx[static_cast<std::size_t>(ox)];
                    const float top = src[a.lo * w + b.lo] * (1 - b.t) + src[a.lo * w + b.hi] * b.t;
                    const float bot = src[a.hi * w + b.lo] * (1 - b.t) + src[a.hi * w + b.hi] * b.t;
                    dst[oy * ow + ox] = top * (1 - a.t) + bot * a.t;
                }
            }
        }
    } else {
        n.fail("unsupported resize mode " + mode);
    }
    return {Value::floats(out_shape, std::move(out))};
}

// ---------------------------------------------------------------- shape ops

std::vector<Value> identity(const Node& n, Inputs in) { return {need(n, in, 0)}; }

std::vector<Value> reshape(const Node& n, Inputs in) {
    Value v = need(n, in, 0);
    Shape target;
    if (n.opset < 5) {
        target = n.attr_ints("shape");
    } else {
        target = need(n, in, 1).as_ints();
    }
    const bool allowzero = n.attr_int("allowzero", 0) != 0;
    std::int64_t known = 1;
    int infer_at = -1;
    for (std::size_t d = 0; d < target.size(); ++d) {
        if (target[d] == 0 && !allowzero) {
            if (d >= v.shape.size()) n.fail("reshape copies a missing dimension");
            target[d] = v.shape[d];
        }
        if (target[d] == -1) {
            if (infer_at >= 0) n.fail("reshape has more than one -1");
            infer_at = static_cast<int>(d);
        } else {
            known *= target[d];
        }
    }
    if (infer_at >= 0) {
        if (known == 0) n.fail("cannot infer reshape dimension");
        target[static_cast<std::size_t>(infer_at)] = v.numel() / known;
    }
    if (element_count(target) != v.numel()) {
        n.fail("cannot reshape " + shape_string(v.shape) + " to " + shape_string(target));
    }
    v.shape = target;
    return {std::move(v)};
}

std::vector<Value> flatten(const Node& n, Inputs in) {
    Value v = need(n, in, 0);
    const std::int64_t axis = n.attr_int("axis", 1);
    const std::int64_t a = axis == v.rank() ? axis : normalize_axis(n, axis, v.rank());
    v.shape = {product(v.shape, 0, static_cast<std::size_t>(a)), product(v.shape, static_cast<std::size_t>(a), v.shape.size())};
    return {std::move(v)};
}

std::vector<Value> squeeze(const Node& n, Inputs in) {
    Value v = need(n, in, 0);
    Shape axes = n.opset < 13 ? n.attr_ints("axes") : (optional_input(in, 1) ? in[1]->as_ints() : Shape{});
    Shape out;
    for (std::int64_t d = 0; d < v.rank(); ++d) {
        bool drop;
        if (axes.empty()) {
            drop = v.shape[static_cast<std::size_t>(d)] == 1;
        } else {
            drop = std::any_of(axes.begin(), axes.end(),
                               [&](std::int64_t a) { return normalize_axis(n, a, v.rank()) == d; });
            if (drop && v.shape[static_cast<std::size_t>(d)] != 1) n.fail("cannot squeeze a non-unit axis");
        }
        if (!drop) out.push_back(v.shape[static_cast<std::size_t>(d)]);
    }
    v.shape = out;
    return {std::move(v)};
}

std::vector<Value> unsqueeze(const Node& n, Inputs in) {
    Value v = need(n, in, 0);
    Shape axes = n.opset < 13 ? n.attr_ints("axes") : need(n, in, 1).as_ints();
    const std::int64_t out_rank = v.rank() + static_cast<std::int64_t>(axes.size());
    for (auto& a : axes) a = normalize_axis(n, a, out_rank);
    std::sort(axes.begin(), axes.end());
    Shape out;
    std::size_t src = 0;
    for (std::int64_t d = 0; d < out_rank; ++d) {
        if (std::binary_search(axes.begin(), axes.end(), d)) {
            out.push_back(1);
        } else {
            out.push_back(v.shape[src++]);
        }
    }
    v.shape = out;
    return {std::move(v)};
}

std::vector<Value> transpose(const Node& n, Inputs in) {
    const Value& v = need(n, in, 0);
    const std::size_t rank = v.shape.size();
    Shape perm = n.attr_ints("perm");
    if (perm.empty()) {
        perm.resize(rank);
        for (std::size_t d = 0; d < rank; ++d) perm[d] = static_cast<std::int64_t>(rank - 1 - d);
    }
    if (perm.size() != rank) n.fail("perm length differs from rank");
    Shape out_shape(rank);
    const Shape in_strides = strides_of(v.shape);
    Shape src_strides(rank);
    for (std::size_t d = 0; d < rank; ++d) {
        out_shape[d] = v.shape[static_cast<std::size_t>(perm[d])];
        src_strides[d] = in_strides[static_cast<std::size_t>(perm[d])];
    }
    return visit_type(v.type, [&](auto tag) {
        using T = decltype(tag);
        const auto& src = storage<T>(v);
        std::vector<T> dst(src.size());
        Shape idx(rank, 0);
        std::int64_t off = 0;
        for (std::size_t k = 0; k < dst.size(); ++k) {
            dst[k] = src[static_cast<std::size_t>(off)];
            for (std::int64_t d = static_cast<std::int64_t>(rank) - 1; d >= 0; --d) {
                const auto du = static_cast<std::size_t>(d);
                ++idx[du];
                off += src_strides[du];
                if (idx[du] < out_shape[du]) break;
                off -= src_strides[du] * idx[du];
                idx[du] = 0;
            }
        }
        Value r;
        r.type = v.type;
        r.shape = out_shape;
        storage<T>(r) = std::move(dst);
        return std::vector<Value>{std::move(r)};
    });
}

std::vector<Value> concat(const Node& n, Inputs in) {
    const Value& first = need(n, in, 0);
    const std::int64_t axis = normalize_axis(n, n.attr_int("axis", 0), first.rank());
    Shape out_shape = first.shape;
    out_shape[static_cast<std::size_t>(axis)] = 0;
    for (std::size_t k = 0; k < in.size(); ++k) {
        const Value& v = need(n, in, k);
        if (v.type != first.type || v.rank() != first.rank()) n.fail("concat inputs differ in type or rank");
        for (std::int64_t d = 0; d < v.rank(); ++d) {
            if (d != axis && v.shape[static_cast<std::size_t>(d)] != first.shape[static_cast<std::size_t>(d)]) {
                n.fail("concat inputs differ off-axis: " + shape_string(v.shape) + " vs " + shape_string(first.shape));
            }
        }
        out_shape[static_cast<std::size_t>(axis)] += v.shape[static_cast<std::size_t>(axis)];
    }
    const std::int64_t outer = product(first.shape, 0, static_cast<std::size_t>(axis));
    return visit_type(first.type, [&](auto tag) {
        using T = decltype(tag);
        std::vector<T> dst;
        dst.reserve(static_cast<std::size_t>(element_count(out_shape)));
        for (std::int64_t o = 0; o < outer; ++o) {
            for (std::size_t k = 0; k < in.size(); ++k) {
                const auto& src = storage<T>(*in[k]);
                const std::int64_t block = product(in[k]->shape, static_cast<std::size_t>(axis), in[k]->shape.size());
                dst.insert(dst.end(), src.begin() + o * block, src.begin() + (o + 1) * block);
            }
        }
        Value r;
        r.type = first.type;
        r.shape = out_shape;
        storage<T>(r) = std::move(dst);
        return std::vector<Value>{std::move(r)};
    });
}

std::vector<Value> split(const Node& n, Inputs in) {
    const Value& v = need(n, in, 0);
    const std::int64_t axis = normalize_axis(n, n.attr_int("axis", 0), v.rank());
    const std::int64_t dim = v.shape[static_cast<std::size_t>(axis)];
    const std::size_t parts = n.outputs.size();
    Shape sizes;
    if (n.opset >= 13) {
        if (const Value* s = optional_input(in, 1)) sizes = s->as_ints();
    } else {
        sizes = n.attr_ints("split");
    }
    if (sizes.empty()) {
        const std::int64_t num = n.attr_int("num_outputs", static_cast<std::int64_t>(parts));
        const std::int64_t chunk = (dim + num - 1) / num;
        for (std::int64_t k = 0; k < num; ++k) sizes.push_back(std::min(chunk, dim - k * chunk));
    }
    if (sizes.size() != parts || std::accumulate(sizes.begin(), sizes.end(), std::int64_t{0}) != dim) {
        n.fail("split sizes do not cover the axis");
    }
    const std::int64_t outer = product(v.shape, 0, static_cast<std::size_t>(axis));
    const std::int64_t inner = product(v.shape, static_cast<std::size_t>(axis) + 1, v.shape.size());
    std::vector<Value> outs;
    std::int64_t start = 0;
    for (std::size_t k = 0; k < parts; ++k) {
        Shape s = v.shape;
        s[static_cast<std::size_t>(axis)] = sizes[k];
        Value r;
        r.type = v.type;
        r.shape = s;
        visit_type(v.type, [&](auto tag) {
            using T = decltype(tag);
            const auto& src = storage<T>(v);
            auto& dst = storage<T>(r);
            dst.reserve(static_cast<std::size_t>(element_count(s)));
            for (std::int64_t o = 0; o < outer; ++o) {
                const auto base = src.begin() + (o * dim + start) * inner;
                dst.insert(dst.end(), base, base + sizes[k] * inner);
            }
            return 0;
        });
        start += sizes[k];
        outs.push_back(std::move(r));
    }
    return outs;
}

std::vector<Value> slice(const Node& n, Inputs in) {
    const Value& v = need(n, in, 0);
    Shape starts, ends, axes, steps;
    if (n.opset < 10) {
        starts = n.attr_ints("starts");
        ends = n.attr_ints("ends");
        axes = n.attr_ints("axes");
    } else {
        starts = need(n, in, 1).as_ints();
        ends = need(n, in, 2).as_ints();
        if (const Value* a = optional_input(in, 3)) axes = a->as_ints();
        if (const Value* s = optional_input(in, 4)) steps = s->as_ints();
    }
    if (axes.empty()) {
        for (std::size_t k = 0; k < starts.size(); ++k) axes.push_back(static_cast<std::int64_t>(k));
    }
    if (steps.empty()) steps.assign(starts.size(), 1);
    if (ends.size() != starts.size() || axes.size() != starts.size() || steps.size() != starts.size()) {
        n.fail("slice parameter lengths differ");
    }
    const std::size_t rank = v.shape.size();
    Shape begin(rank, 0), step(rank, 1), out_shape = v.shape;
    for (std::size_t k = 0; k < starts.size(); ++k) {
        const auto d = static_cast<std::size_t>(normalize_axis(n, axes[k], v.rank()));
        const std::int64_t dim = v.shape[d];
        const std::int64_t s = steps[k];
        if (s == 0) n.fail("slice step must be non-zero");
        std::int64_t b = starts[k] < 0 ? starts[k] + dim : starts[k];
        std::int64_t e = ends[k] < 0 ? ends[k] + dim : ends[k];
        if (s > 0) {
            b = std::clamp<std::int64_t>(b, 0, dim);
            e = std::clamp<std::int64_t>(e, 0, dim);
            out_shape[d] = std::max<std::int64_t>(0, (e - b + s - 1) / s);
        } else {
            b = std::clamp<std::int64_t>(b, 0, dim - 1);
            e = std::clamp<std::int64_t>(e, -1, dim - 1);
            out_shape[d] = std::max<std::int64_t>(0, (b - e + (-s) - 1) / (-s));
        }
        begin[d] = b;
        step[d] = s;
    }
    const Shape st = strides_of(v.shape);
    return visit_type(v.type, [&](auto tag) {
        using T = decltype(tag);
        const auto& src = storage<T>(v);
        std::vector<T> dst(static_cast<std::size_t>(element_count(out_shape)));
        Shape idx(rank, 0);
        for (std::size_t k = 0; k < dst.size(); ++k) {
            std::int64_t off = 0;
            for (std::size_t d = 0; d < rank; ++d) off += (begin[d] + idx[d] * step[d]) * st[d];
            dst[k] = src[static_cast<std::size_t>(off)];
            for (std::int64_t d = static_cast<std::int64_t>(rank) - 1; d >= 0; --d) {
                const auto du = static_cast<std::size_t>(d);
                if (++idx[du] < out_shape[du]) break;
                idx[du] = 0;
            }
        }
        Value r;
        r.type = v.type;
        r.shape = out_shape;
        storage<T>(r) = std::move(dst);
        return std::vector<Value>{std::move(r)};
    });
}

std::vector<Value> gather(const Node& n, Inputs in) {
    const Value& v = need(n, in, 0);
    const Value& idx = need(n, in, 1);
    const std::int64_t axis = normalize_axis(n, n.attr_int("axis", 0), v.rank());
    const auto ids = idx.as_ints();
    const std::int64_t dim = v.shape[static_cast<std::size_t>(axis)];
    const std::int64_t outer = product(v.shape, 0, static_cast<std::size_t>(axis));
    const std::int64_t inner = product(v.shape, static_cast<std::size_t>(axis) + 1, v.shape.size());
    Shape out_shape(v.shape.begin(), v.shape.begin() + axis);
    out_shape.insert(out_shape.end(), idx.shape.begin(), idx.shape.end());
    out_shape.insert(out_shape.end(), v.shape.begin() + axis + 1, v.shape.end());
    return visit_type(v.type, [&](auto tag) {
        using T = decltype(tag);
        const auto& src = storage<T>(v);
        std::vector<T> dst;
        dst.reserve(static_cast<std::size_t>(element_count(out_shape)));
        for (std::int64_t o = 0; o < outer; ++o) {
            for (std::int64_t id : ids) {
                if (id < -dim || id >= dim) n.fail("gather index out of range");
                const std::int64_t j = id < 0 ? id + dim : id;
                const auto base = src.begin() + (o * dim + j) * inner;
                dst.insert(dst.end(), base, base + inner);
            }
        }
        Value r;
        r.type = v.type;
        r.shape = out_shape;
        storage<T>(r) = std::move(dst);
        return std::vector<Value>{std::move(r)};
    });
}

std::vector<Value> shape_op(const Node& n, Inputs in) {
    const Value& v = need(n, in, 0);
    std::int64_t start = n.attr_int("start", 0);
    std::int64_t end = n.attr_int("end", v.rank());
    if (start < 0) start += v.rank();
    if (end < 0) end += v.rank();
    start = std::clamp<std::int64_t>(start, 0, v.rank());
    end = std::clamp<std::int64_t>(end, start, v.rank());
    Shape s(v.shape.begin() + start, v.shape.begin() + end);
    return {Value::ints({static_cast<std::int64_t>(s.size())}, s)};
}

std::vector<Value> cast(const Node& n, Inputs in) {
    const Value& v = need(n, in, 0);
    const std::int64_t to = n.attr_int("to", 1);
    if (to == 1 || to == 11 || to == 10) {
        return {Value::floats(v.shape, v.as_floats())};
    }
    if (to == 7 || to == 6 || to == 9 || to == 2 || to == 3 || to == 4 || to == 5 || to == 12 || to == 13) {
        return {Value::ints(v.shape, v.as_ints())};
    }
    n.fail("unsupported cast target type " + std::to_string(to));
}

std::vector<Value> constant(const Node& n, Inputs) {
    if (const Attribute* a = n.attr("value"); a && a->tensor) return {*a->tensor};
    if (const Attribute* a = n.attr("value_float"); a && a->f) return {Value::floats({}, {*a->f})};
    if (const Attribute* a = n.attr("value_floats")) {
        return {Value::floats({static_cast<std::int64_t>(a->floats.size())}, a->floats)};
    }
    if (const Attribute* a = n.attr("value_int"); a && a->i) return {Value::ints({}, {*a->i})};
    if (const Attribute* a = n.attr("value_ints")) {
        return {Value::ints({static_cast<std::int64_t>(a->ints.size())}, a->ints)};
    }
    n.fail("Constant without a supported value attribute");
}

std::vector<Value> constant_of_shape(const Node& n, Inputs in) {
    const Shape s = need(n, in, 0).as_ints();
    Value fill = Value::floats({1}, {0.0f});
    if (const Attribute* a = n.attr("value"); a && a->tensor) fill = *a->tensor;
    Value r;
    r.type = fill.type;
    r.shape = s;
    if (fill.type == DType::f32) {
        r.f.assign(static_cast<std::size_t>(element_count(s)), fill.f.at(0));
    } else {
        r.i.assign(static_cast<std::size_t>(element_count(s)), fill.i.at(0));
    }
    return {std::move(r)};
}

std::vector<Value> expand(const Node& n, Inputs in) {
    const Value& v = need(n, in, 0);
    const Shape target = need(n, in, 1).as_ints();
    const Shape out = broadcast_shape(n, v.shape, target);
    return visit_type(v.type, [&](auto tag) {
        using T = decltype(tag);
        const std::vector<T> zeros(static_cast<std::size_t>(element_count(out)), T{});
        Value r;
        r.type = v.type;
        r.shape = out;
        storage<T>(r) = broadcast_apply(storage<T>(v), v.shape, zeros, out, out, [](T a, T) { return a; });
        return std::vector<Value>{std::move(r)};
    });
}

std::vector<Value> range(const Node& n, Inputs in) {
    const Value& s = need(n, in, 0);
    const Value& l = need(n, in, 1);
    const Value& d = need(n, in, 2);
    if (s.type == DType::i64) {
        const std::int64_t a = s.i.at(0), b = l.i.at(0), c = d.i.at(0);
        if (c == 0) n.fail("range delta is zero");
        const std::int64_t count = std::max<std::int64_t>(0, (b - a + c + (c > 0 ? -1 : 1)) / c);
        std::vector<std::int64_t> r(static_cast<std::size_t>(count));
        for (std::int64_t k = 0; k < count; ++k) r[static_cast<std::size_t>(k)] = a + k * c;
        return {Value::ints({count}, std::move(r))};
    }
    const float a = s.f.at(0), b = l.f.at(0), c = d.f.at(0);
    const auto count = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil((b - a) / c)));
    std::vector<float> r(static_cast<std::size_t>(count));
    for (std::int64_t k = 0; k < count; ++k) r[static_cast<std::size_t>(k)] = a + static_cast<float>(k) * c;
    return {Value::floats({count}, std::move(r))};
}

// ---------------------------------------------------------------- linear algebra

std::vector<Value> softmax(const Node& n, Inputs in) {
    Value v = need_float(n, in, 0);
    const std::int64_t rank = v.rank();
    std::int64_t outer, len, inner;
    if (n.opset < 13) {
        const std::int64_t axis = normalize_axis(n, n.attr_int("axis", 1), rank);
        outer = product(v.shape, 0, static_cast<std::size_t>(axis));
        len = product(v.shape, static_cast<std::size_t>(axis), v.shape.size());
        inner = 1;
    } else {
        const std::int64_t axis = normalize_axis(n, n.attr_int("axis", -1), rank);
        outer = product(v.shape, 0, static_cast<std::size_t>(axis));
        len = v.shape[static_cast<std::size_t>(axis)];
        inner = product(v.shape, static_cast<std::size_t>(axis) + 1, v.shape.size());
    }
    for (std::int64_t o = 0; o < outer; ++o) {
        for (std::int64_t k = 0; k < inner; ++k) {
            float* base = v.f.data() + o * len * inner + k;
            float mx = -std::numeric_limits<float>::infinity();
            for (std::int64_t j = 0; j < len; ++j) mx = std::max(mx, base[j * inner]);
            float sum = 0.0f;
            for (std::int64_t j = 0; j < len; ++j) {
                base[j * inner] = std::exp(base[j * inner] - mx);
                sum += base[j * inner];
            }
            for (std::int64_t j = 0; j < len; ++j) base[j * inner] /= sum;
        }
    }
    return {std::move(v)};
}

std::vector<Value> matmul(const Node& n, Inputs in) {
    Value a = need_float(n, in, 0);
    Value b = need_float(n, in, 1);
    const bool a_vec = a.rank() == 1, b_vec = b.rank() == 1;
    if (a_vec) a.shape.insert(a.shape.begin(), 1);
    if (b_vec) b.shape.push_back(1);
    const std::int64_t m = a.shape[a.shape.size() - 2], k = a.shape.back();
    const std::int64_t k2 = b.shape[b.shape.size() - 2], nn = b.shape.back();
    if (k != k2) n.fail("matmul inner dimensions differ: " + shape_string(a.shape) + " x " + shape_string(b.shape));
    const Shape a_batch(a.shape.begin(), a.shape.end() - 2), b_batch(b.shape.begin(), b.shape.end() - 2);
    const Shape batch = broadcast_shape(n, a_batch, b_batch);
    const std::int64_t count = element_count(batch);
    // Broadcast batch offsets through an index tensor.
    std::vector<std::int64_t> a_ids(static_cast<std::size_t>(element_count(a_batch)));
    std::vector<std::int64_t> b_ids(static_cast<std::size_t>(element_count(b_batch)));
    std::iota(a_ids.begin(), a_ids.end(), 0);
    std::iota(b_ids.begin(), b_ids.end(), 0);
    const std::vector<std::int64_t> zeros(static_cast<std::size_t>(count), 0);
    const auto ai = broadcast_apply(a_ids, a_batch, zeros, batch, batch, [](auto x, auto) { return x; });
    const auto bi = broadcast_apply(b_ids, b_batch, zeros, batch, batch, [](auto x, auto) { return x; });
    std::vector<float> out(static_cast<std::size_t>(count * m * nn));
    for (std::int64_t t = 0; t < count; ++t) {
        const ConstMap am(a.f.data() + ai[static_cast<std::size_t>(t)] * m * k, m, k);
        const ConstMap bm(b.f.data() + bi[static_cast<std::size_t>(t)] * k * nn, k, nn);
        MutMap om(out.data() + t * m * nn, m, nn);
        om.noalias() = am * bm;
    }
    Shape out_shape = batch;
    if (!a_vec) out_shape.push_back(m);
    if (!b_vec) out_shape.push_back(nn);
    return {Value::floats(out_shape, std::move(out))};
}

std::vector<Value> gemm(const Node& n, Inputs in) {
    const Value& a = need_float(n, in, 0);
    const Value& b = need_float(n, in, 1);
    const Value* c = optional_input(in, 2);
    if (a.rank() != 2 || b.rank() != 2) n.fail("Gemm needs 2-D operands");
    const float alpha = n.attr_float("alpha", 1.0f), beta = n.attr_float("beta", 1.0f);
    const bool ta = n.attr_int("transA", 0) != 0, tb = n.attr_int("transB", 0) != 0;
    const ConstMap am(a.f.data(), a.shape[0], a.shape[1]);
    const ConstMap bm(b.f.data(), b.shape[0], b.shape[1]);
    RowMatrix r = ta ? (tb ? RowMatrix(am.transpose() * bm.transpose()) : RowMatrix(am.transpose() * bm))
                     : (tb ? RowMatrix(am * bm.transpose()) : RowMatrix(am * bm));
    r *= alpha;
    const Shape out_shape = {r.rows(), r.cols()};
    std::vector<float> out(r.data(), r.data() + r.size());
    if (c) {
        const Shape bs = broadcast_shape(n, c->shape, out_shape);
        if (bs != out_shape) n.fail("Gemm bias does not broadcast to the output");
        const std::vector<float> scaled = broadcast_apply(out, out_shape, c->f, c->shape, out_shape,
                                                          [beta](float x, float y) { return x + beta * y; });
        out = scaled;
    }
    return {Value::floats(out_shape, std::move(out))};
}

}  // namespace

const std::map<std::string, Kernel>& kernel_registry() {
    static const std::map<std::string, Kernel> registry = [] {
        std::map<std::string, Kernel> r;
        r["Add"] = binary(std::plus<float>{}, std::plus<std::int64_t>{});
        r["Sub"] = binary(std::minus<float>{}, std::minus<std::int64_t>{});
        r["Mul"] = binary(std::multiplies<float>{}, std::multiplies<std::int64_t>{});
        r["Div"] = binary(std::divides<float>{}, [](std::int64_t x, std::int64_t y) { return y == 0 ? 0 : x / y; });
        r["Pow"] = binary([](float x, float y) { return std::pow(x, y); },
                          [](std::int64_t x, std::int64_t y) {
                              return static_cast<std::int64_t>(std::pow(static_cast<double>(x), static_cast<double>(y)));
                          });
        r["Max"] = [](const Node& n, Inputs in) { return variadic_extreme(n, in, true); };
        r["Min"] = [](const Node& n, Inputs in) { return variadic_extreme(n, in, false); };
        r["Relu"] = unary([](float x) { return std::max(x, 0.0f); });
        r["Sigmoid"] = unary(sigmoid);
        r["Tanh"] = unary([](float x) { return std::tanh(x); });
        r["Exp"] = unary([](float x) { return std::exp(x); });
        r["Log"] = unary([](float x) { return std::log(x); });
        r["Sqrt"] = unary([](float x) { return std::sqrt(x); });
        r["Neg"] = unary([](float x) { return -x; });
        r["Abs"] = unary([](float x) { return std::abs(x); });
        r["Floor"] = unary([](float x) { return std::floor(x); });
        r["Ceil"] = unary([](float x) { return std::ceil(x); });
        r["LeakyRelu"] = [](const Node& n, Inputs in) {
            const float alpha = n.attr_float("alpha", 0.01f);
            return unary([alpha](float x) { return x >= 0.0f ? x : alpha * x; })(n, in);
        };
        r["HardSigmoid"] = [](const Node& n, Inputs in) {
            const float alpha = n.attr_float("alpha", 0.2f), beta = n.attr_float("beta", 0.5f);
            return unary([=](float x) { return std::clamp(alpha * x + beta, 0.0f, 1.0f); })(n, in);
        };
        r["HardSwish"] = unary([](float x) { return x * std::clamp(x / 6.0f + 0.5f, 0.0f, 1.0f); });
        r["Clip"] = clip;
        r["Conv"] = conv;
        r["ConvTranspose"] = conv_transpose;
        r["MaxPool"] = [](const Node& n, Inputs in) { return pool(n, in, true); };
        r["AveragePool"] = [](const Node& n, Inputs in) { return pool(n, in, false); };
        r["GlobalAveragePool"] = global_average_pool;
        r["Resize"] = resize;
        r["Upsample"] = resize;
        r["Identity"] = identity;
        r["Reshape"] = reshape;
        r["Flatten"] = flatten;
        r["Squeeze"] = squeeze;
        r["Unsqueeze"] = unsqueeze;
        r["Transpose"] = transpose;
        r["Concat"] = concat;
        r["Split"] = split;
        r["Slice"] = slice;
        r["Gather"] = gather;
        r["Shape"] = shape_op;
        r["Cast"] = cast;
        r["Constant"] = constant;
        r["ConstantOfShape"] = constant_of_shape;
        r["Expand"] = expand;
        r["Range"] = range;
        r["Softmax"] = softmax;
        r["MatMul"] = matmul;
        r["Gemm"] = gemm;
        return r;
    }();
    return registry;
}

}  // namespace flakelens::infer::onnx_rt
