#include "train_util.hpp"

#include <algorithm>
#include <cmath>

#include "qbrick/errors.hpp"
#include "eigen_util.hpp"

namespace qbrick::detail {

namespace {

using Eigen::Index;
using StridedMap = Eigen::Map<const MatRM, 0, Eigen::OuterStride<>>;

// Slice of a rank-3 site at fixed physical index: (Dl x Dr) with row stride p*Dr.
StridedMap phys_slice(const Tensor& t, std::size_t q) {
    const auto dl = static_cast<Index>(t.dim(0));
    const auto p = static_cast<Index>(t.dim(1));
    const auto dr = static_cast<Index>(t.dim(2));
    return StridedMap(t.data() + static_cast<Index>(q) * dr, dl, dr, Eigen::OuterStride<>(p * dr));
}

void absorb_right(Tensor& site, const Tensor& carry, double inv_scale_root) {
    // site[l,q,r] <- sum_m site[l,q,m] carry[m,r] * inv_scale_root
    const std::size_t dl = site.dim(0), p = site.dim(1);
    const std::size_t k = carry.dim(1);
    Tensor out({dl, p, k});
    as_matrix(out, dl * p, k).noalias() =
        as_matrix(site, dl * p, site.dim(2)) * (as_matrix(carry) * inv_scale_root);
    site = std::move(out);
}

} // namespace

void train_right_canonicalize(std::vector<Tensor>& sites, double scale) {
    const double root = std::sqrt(scale);
    for (std::size_t j = sites.size(); j-- > 1;) {
        Tensor& t = sites[j];
        const std::size_t dl = t.dim(0), p = t.dim(1), dr = t.dim(2);
        auto [l, q] = lq(t.reshaped({dl, p * dr}));
        const std::size_t k = q.dim(0);
        sites[j] = std::move(q).reshaped({k, p, dr});
        if (scale != 1.0) sites[j] *= root;
        absorb_right(sites[j - 1], l, 1.0 / root);
    }
}

double train_truncate(std::vector<Tensor>& sites, double scale, const TruncOptions& opt) {
    if (opt.cap < 1) throw DomainError("truncate: bond cap must be at least 1");
    const double root = std::sqrt(scale);
    const std::size_t n = sites.size();
    double discarded = 0.0;

    Tensor carry; // k x Dl, absent initially
    for (std::size_t j = 0; j + 1 < n; ++j) {
        Tensor& t = sites[j];
        if (carry.rank() == 2) {
            const std::size_t dl = t.dim(0), p = t.dim(1), dr = t.dim(2);
            Tensor merged({carry.dim(0), p, dr});
            // merged[c,q,r] = sum_l carry[c,l] t[l,q,r]
            as_matrix(merged, carry.dim(0), p * dr).noalias() =
                as_matrix(carry) * as_matrix(t, dl, p * dr);
            t = std::move(merged);
        }
        const std::size_t dl = t.dim(0), p = t.dim(1), dr = t.dim(2);
        SvdResult f = svd(t.reshaped({dl * p, dr}));
        const std::size_t k = f.s.size();

        double total = 0.0;
        for (double s : f.s) total += s * s;
        std::size_t keep = std::min(opt.cap, k);
        if (opt.rtol >= 0.0 && k > 0) {
            const double floor = opt.rtol * f.s[0];
            std::size_t kept = 0;
            while (kept < k && f.s[kept] > floor) ++kept;
            keep = std::min(keep, std::max<std::size_t>(kept, 1));
        }
        if (total > 0.0) {
            double dropped = 0.0;
            for (std::size_t i = keep; i < k; ++i) dropped += f.s[i] * f.s[i];
            discarded += dropped / total;
        }

        Tensor u({dl * p, keep});
        as_matrix(u).noalias() = as_matrix(f.u).leftCols(static_cast<Eigen::Index>(keep));
        sites[j] = std::move(u).reshaped({dl, p, keep});
        if (scale != 1.0) sites[j] *= root;

        carry = Tensor({keep, f.vh.dim(1)});
        as_matrix(carry).noalias() =
            Eigen::Map<const Eigen::VectorXd>(f.s.data(), static_cast<Eigen::Index>(keep))
                .cast<cplx>()
                .asDiagonal() *
            as_matrix(f.vh).topRows(static_cast<Eigen::Index>(keep));
        if (scale != 1.0) carry *= (1.0 / root);
    }
    if (carry.rank() == 2) {
        Tensor& t = sites[n - 1];
        Tensor merged({carry.dim(0), t.dim(1), t.dim(2)});
        as_matrix(merged, carry.dim(0), t.dim(1) * t.dim(2)).noalias() =
            as_matrix(carry) * as_matrix(t, t.dim(0), t.dim(1) * t.dim(2));
        sites[n - 1] = std::move(merged);
    }
    if (opt.renormalize) {
        // all sites but the last are left-canonical up to the scale factor
        const double tail = sites[n - 1].norm();
        if (tail > 0.0) sites[n - 1] *= (root / tail);
    }
    return discarded;
}

double train_norm_sq(const std::vector<Tensor>& sites) {
    return train_inner(sites, sites).real();
}

cplx train_inner(const std::vector<Tensor>& bra, const std::vector<Tensor>& ket) {
    if (bra.size() != ket.size()) throw ShapeError("inner: trains have different lengths");
    MatRM env = MatRM::Ones(1, 1);
    for (std::size_t j = 0; j < bra.size(); ++j) {
        const Tensor& b = bra[j];
        const Tensor& k = ket[j];
        if (b.dim(1) != k.dim(1)) throw ShapeError("inner: physical dimensions differ");
        const std::size_t p = b.dim(1);
        MatRM next = MatRM::Zero(static_cast<Eigen::Index>(b.dim(2)),
                                 static_cast<Eigen::Index>(k.dim(2)));
        for (std::size_t q = 0; q < p; ++q)
            next.noalias() += phys_slice(b, q).adjoint() * (env * phys_slice(k, q));
        env = std::move(next);
    }
    return env(0, 0);
}

std::vector<double> train_schmidt(const std::vector<Tensor>& sites, double scale,
                                  std::size_t cut, int form) {
    const std::size_t n = sites.size();
    if (cut < 1 || cut >= n) throw DomainError("schmidt: cut out of range");

    if (form == 2) { // right-canonical: QR sweep from the left edge to the cut
        Tensor carry;
        for (std::size_t j = 0; j < cut; ++j) {
            const Tensor& t = sites[j];
            const std::size_t dl = t.dim(0), p = t.dim(1), dr = t.dim(2);
            Tensor m({carry.rank() == 2 ? carry.dim(0) : dl, p, dr});
            if (carry.rank() == 2) {
                as_matrix(m, m.dim(0), p * dr).noalias() =
                    as_matrix(carry) * as_matrix(t, dl, p * dr);
            } else {
                m = t;
            }
            auto [q, r] = qr(m.reshaped({m.dim(0) * p, dr}));
            carry = std::move(r);
        }
        SvdResult f = svd(carry);
        double total = 0.0;
        for (double s : f.s) total += s * s;
        if (total <= 0.0) return {1.0};
        for (double& s : f.s) s /= std::sqrt(total);
        return std::move(f.s);
    }
    if (form == 1) { // left-canonical: LQ sweep from the right edge to the cut
        Tensor carry;
        for (std::size_t j = n; j-- > cut;) {
            const Tensor& t = sites[j];
            const std::size_t dl = t.dim(0), p = t.dim(1), dr = t.dim(2);
            Tensor m({dl, p, carry.rank() == 2 ? carry.dim(1) : dr});
            if (carry.rank() == 2) {
                as_matrix(m, dl * p, m.dim(2)).noalias() =
                    as_matrix(t, dl * p, dr) * as_matrix(carry);
            } else {
                m = t;
            }
            auto [l, q] = lq(m.reshaped({dl, p * m.dim(2)}));
            carry = std::move(l);
        }
        SvdResult f = svd(carry);
        double total = 0.0;
        for (double s : f.s) total += s * s;
        if (total <= 0.0) return {1.0};
        for (double& s : f.s) s /= std::sqrt(total);
        return std::move(f.s);
    }
    std::vector<Tensor> copy = sites;
    train_right_canonicalize(copy, scale);
    return train_schmidt(copy, scale, cut, 2);
}

void train_apply_1q(std::vector<Tensor>& sites, const Tensor& g, std::size_t site) {
    Tensor& t = sites[site];
    const std::size_t dl = t.dim(0), p = t.dim(1), dr = t.dim(2);
    if (g.dim(0) != p || g.dim(1) != p) throw ShapeError("apply_1q: gate does not match physical dimension");
    Tensor out({dl, p, dr});
    auto gm = as_matrix(g);
    for (std::size_t l = 0; l < dl; ++l) {
        MapRM dst(out.data() + l * p * dr, static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(dr));
        ConstMapRM src(t.data() + l * p * dr, static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(dr));
        dst.noalias() = gm * src;
    }
    t = std::move(out);
}

Split2Q make_split(const Tensor& lifted_2q, std::size_t phys) {
    const std::size_t p = phys, pp = p * p;
    if (lifted_2q.dim(0) != pp || lifted_2q.dim(1) != pp)
        throw ShapeError("make_split: gate dimension mismatch");
    // regroup G[(a' b'),(a b)] -> M[(a' a),(b' b)] and factorize
    Tensor m({pp, pp});
    for (std::size_t ap = 0; ap < p; ++ap)
        for (std::size_t bp = 0; bp < p; ++bp)
            for (std::size_t a = 0; a < p; ++a)
                for (std::size_t b = 0; b < p; ++b)
                    m.data()[(ap * p + a) * pp + (bp * p + b)] =
                        lifted_2q.data()[(ap * p + bp) * pp + (a * p + b)];
    SvdResult f = svd(m);
    Split2Q out;
    const double tol = f.s.empty() ? 0.0 : 1e-14 * f.s[0];
    for (std::size_t alpha = 0; alpha < f.s.size(); ++alpha) {
        if (f.s[alpha] <= tol) break;
        const double root = std::sqrt(f.s[alpha]);
        Tensor x({p, p}), y({p, p});
        for (std::size_t i = 0; i < pp; ++i) {
            x.data()[i] = f.u.data()[i * f.s.size() + alpha] * root;
            y.data()[i] = f.vh.data()[alpha * pp + i] * root;
        }
        out.left.push_back(std::move(x));
        out.right.push_back(std::move(y));
    }
    return out;
}

void train_apply_2q_split(std::vector<Tensor>& sites, const Split2Q& g, std::size_t site) {
    const std::size_t r = g.left.size();
    Tensor& a = sites[site];
    Tensor& b = sites[site + 1];
    const std::size_t dla = a.dim(0), p = a.dim(1), dra = a.dim(2);
    const std::size_t dlb = b.dim(0), drb = b.dim(2);
    if (dra != dlb) throw ShapeError("apply_2q: adjacent bonds do not match");

    Tensor na({dla, p, r * dra});
    for (std::size_t alpha = 0; alpha < r; ++alpha) {
        auto gm = as_matrix(g.left[alpha]);
        for (std::size_t l = 0; l < dla; ++l) {
            Eigen::Map<MatRM, 0, Eigen::OuterStride<>> dst(
                na.data() + l * p * r * dra + alpha * dra, static_cast<Eigen::Index>(p),
                static_cast<Eigen::Index>(dra), Eigen::OuterStride<>(static_cast<Eigen::Index>(r * dra)));
            ConstMapRM src(a.data() + l * p * dra, static_cast<Eigen::Index>(p),
                           static_cast<Eigen::Index>(dra));
            dst.noalias() = gm * src;
        }
    }
    Tensor nb({r * dlb, p, drb});
    for (std::size_t alpha = 0; alpha < r; ++alpha) {
        auto gm = as_matrix(g.right[alpha]);
        for (std::size_t l = 0; l < dlb; ++l) {
            MapRM dst(nb.data() + (alpha * dlb + l) * p * drb, static_cast<Eigen::Index>(p),
                      static_cast<Eigen::Index>(drb));
            ConstMapRM src(b.data() + l * p * drb, static_cast<Eigen::Index>(p),
                           static_cast<Eigen::Index>(drb));
            dst.noalias() = gm * src;
        }
    }
    a = std::move(na);
    b = std::move(nb);
}

void train_apply_2q_svd(std::vector<Tensor>& sites, const Tensor& lifted_2q, std::size_t site) {
    Tensor& a = sites[site];
    Tensor& b = sites[site + 1];
    const std::size_t dla = a.dim(0), p = a.dim(1), dra = a.dim(2);
    const std::size_t dlb = b.dim(0), drb = b.dim(2);
    if (dra != dlb) throw ShapeError("apply_2q: adjacent bonds do not match");
    const std::size_t pp = p * p;

    Tensor theta({dla, pp, drb});
    as_matrix(theta, dla * p, p * drb).noalias() =
        as_matrix(a, dla * p, dra) * as_matrix(b, dlb, p * drb);

    Tensor rotated({dla, pp, drb});
    auto gm = as_matrix(lifted_2q);
    for (std::size_t l = 0; l < dla; ++l) {
        MapRM dst(rotated.data() + l * pp * drb, static_cast<Eigen::Index>(pp),
                  static_cast<Eigen::Index>(drb));
        ConstMapRM src(theta.data() + l * pp * drb, static_cast<Eigen::Index>(pp),
                       static_cast<Eigen::Index>(drb));
        dst.noalias() = gm * src;
    }

    SvdResult f = svd(rotated.reshaped({dla * p, p * drb}));
    std::size_t keep = 0;
    const double tol = f.s.empty() ? 0.0 : 1e-14 * f.s[0];
    while (keep < f.s.size() && f.s[keep] > tol) ++keep;
    keep = std::max<std::size_t>(keep, 1);

    Tensor u({dla * p, keep});
    as_matrix(u).noalias() = as_matrix(f.u).leftCols(static_cast<Eigen::Index>(keep));
    a = std::move(u).reshaped({dla, p, keep});

    Tensor sv({keep, p * drb});
    as_matrix(sv).noalias() =
        Eigen::Map<const Eigen::VectorXd>(f.s.data(), static_cast<Eigen::Index>(keep))
            .cast<cplx>()
            .asDiagonal() *
        as_matrix(f.vh).topRows(static_cast<Eigen::Index>(keep));
    b = std::move(sv).reshaped({keep, p, drb});
}

Tensor train_dense(const std::vector<Tensor>& sites) {
    const std::size_t p = sites.empty() ? 2 : sites[0].dim(1);
    std::size_t total = 1;
    for (std::size_t j = 0; j < sites.size(); ++j) {
        total *= p;
        if (total > (1u << 26)) throw DomainError("train_dense: system too large to densify");
    }
    Tensor acc({1, 1}, {cplx(1.0)});
    // acc: [P, Dr]; extend one site at a time
    for (const Tensor& t : sites) {
        const std::size_t bp = acc.dim(0), dl = t.dim(0), q = t.dim(1), dr = t.dim(2);
        Tensor next({bp * q, dr});
        as_matrix(next, bp, q * dr).noalias() = as_matrix(acc, bp, dl) * as_matrix(t, dl, q * dr);
        acc = std::move(next);
    }
    return std::move(acc).reshaped({total});
}

std::size_t train_max_bond(const std::vector<Tensor>& sites) {
    std::size_t m = 1;
    for (const Tensor& t : sites) m = std::max(m, t.dim(2));
    return m;
}

Tensor lift_1q(const Tensor& g, std::size_t phys) {
    if (g.dim(0) != 2 || g.dim(1) != 2) throw ShapeError("lift_1q: expected a 2x2 gate");
    if (phys == 2) return g;
    return kron(g, Tensor::identity(2));
}

Tensor lift_2q(const Tensor& g, std::size_t phys) {
    if (g.dim(0) != 4 || g.dim(1) != 4) throw ShapeError("lift_2q: expected a 4x4 gate");
    if (phys == 2) return g;
    Tensor out({16, 16});
    for (std::size_t t1 = 0; t1 < 2; ++t1)
        for (std::size_t t2 = 0; t2 < 2; ++t2)
            for (std::size_t s1 = 0; s1 < 2; ++s1)
                for (std::size_t s2 = 0; s2 < 2; ++s2) {
                    const cplx v = g.data()[(t1 * 2 + t2) * 4 + (s1 * 2 + s2)];
                    if (v == cplx(0.0)) continue;
                    for (std::size_t w1 = 0; w1 < 2; ++w1)
                        for (std::size_t w2 = 0; w2 < 2; ++w2)
                            out.data()[((t1 * 2 + w1) * 4 + (t2 * 2 + w2)) * 16 +
                                       ((s1 * 2 + w1) * 4 + (s2 * 2 + w2))] = v;
                }
    return out;
}

double entropy_bits(const std::vector<double>& schmidt) {
    double e = 0.0;
    for (double s : schmidt) {
        const double p = s * s;
        if (p > 1e-30) e -= p * std::log2(p);
    }
    return e;
}

} // namespace qbrick::detail
