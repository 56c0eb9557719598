#include "drmdp/cones.hpp"

#include <cmath>

namespace drmdp {

Cone Cone::make(Kind k, int d) {
    if (d <= 0) throw std::invalid_argument("cone dimension must be positive");
    Cone c;
    c.kind = k;
    c.size = d;
    return c;
}

Cone Cone::product(std::vector<Cone> fs) {
    std::vector<Cone> flat;
    for (auto& f : fs) {
        auto sub = f.flattened();
        flat.insert(flat.end(), sub.begin(), sub.end());
    }
    if (flat.empty()) throw std::invalid_argument("product cone must be nonempty");
    if (flat.size() == 1) return flat.front();
    Cone c;
    c.kind = Kind::Product;
    c.factors = std::move(flat);
    return c;
}

int Cone::dim() const {
    switch (kind) {
        case Kind::Psd: return svec_dim(size);
        case Kind::Product: {
            int d = 0;
            for (const auto& f : factors) d += f.dim();
            return d;
        }
        default: return size;
    }
}

std::vector<Cone> Cone::flattened() const {
    if (kind != Kind::Product) return {*this};
    std::vector<Cone> out;
    for (const auto& f : factors) {
        auto sub = f.flattened();
        out.insert(out.end(), sub.begin(), sub.end());
    }
    return out;
}

bool Cone::operator==(const Cone& o) const {
    if (kind != o.kind || size != o.size) return false;
    if (kind == Kind::Product) {
        if (factors.size() != o.factors.size()) return false;
        for (size_t i = 0; i < factors.size(); ++i)
            if (!(factors[i] == o.factors[i])) return false;
    }
    return true;
}

Cone dual_cone(const Cone& c) {
    switch (c.kind) {
        case Cone::Kind::Zero: return Cone::free(c.size);
        case Cone::Kind::Free: return Cone::zero(c.size);
        case Cone::Kind::NonNeg:
        case Cone::Kind::SecondOrder:
        case Cone::Kind::RotatedSecondOrder:
        case Cone::Kind::Psd: return c;
        case Cone::Kind::Product: {
            std::vector<Cone> duals;
            duals.reserve(c.factors.size());
            for (const auto& f : c.factors) duals.push_back(dual_cone(f));
            return Cone::product(std::move(duals));
        }
    }
    throw std::logic_error("unreachable");
}

VectorXd svec(const MatrixXd& m) {
    const int n = static_cast<int>(m.rows());
    const double s2 = std::sqrt(2.0);
    VectorXd v(svec_dim(n));
    int k = 0;
    for (int j = 0; j < n; ++j)
        for (int i = j; i < n; ++i) v[k++] = (i == j) ? m(i, j) : s2 * 0.5 * (m(i, j) + m(j, i));
    return v;
}

MatrixXd smat(const VectorXd& v) {
    // invert n(n+1)/2 = len
    int n = static_cast<int>((std::sqrt(8.0 * static_cast<double>(v.size()) + 1.0) - 1.0) / 2.0 + 0.5);
    if (svec_dim(n) != v.size()) throw std::invalid_argument("svec length is not triangular");
    const double inv_s2 = 1.0 / std::sqrt(2.0);
    MatrixXd m(n, n);
    int k = 0;
    for (int j = 0; j < n; ++j)
        for (int i = j; i < n; ++i) {
            double x = v[k++];
            if (i == j) m(i, j) = x;
            else m(i, j) = m(j, i) = x * inv_s2;
        }
    return m;
}

bool in_cone(const Cone& c, const VectorXd& x, double tol) {
    if (x.size() != c.dim()) throw std::invalid_argument("in_cone: dimension mismatch");
    switch (c.kind) {
        case Cone::Kind::Zero: return x.lpNorm<Eigen::Infinity>() <= tol;
        case Cone::Kind::Free: return true;
        case Cone::Kind::NonNeg: return x.minCoeff() >= -tol;
        case Cone::Kind::SecondOrder:
            return x[0] >= x.tail(x.size() - 1).norm() - tol;
        case Cone::Kind::RotatedSecondOrder: {
            if (x[0] < -tol || x[1] < -tol) return false;
            return 2.0 * x[0] * x[1] >= x.tail(x.size() - 2).squaredNorm() - tol;
        }
        case Cone::Kind::Psd: {
            Eigen::SelfAdjointEigenSolver<MatrixXd> es(smat(x), Eigen::EigenvaluesOnly);
            return es.eigenvalues().minCoeff() >= -tol;
        }
        case Cone::Kind::Product: {
            int off = 0;
            for (const auto& f : c.factors) {
                if (!in_cone(f, x.segment(off, f.dim()), tol)) return false;
                off += f.dim();
            }
            return true;
        }
    }
    throw std::logic_error("unreachable");
}

std::string cone_name(const Cone& c) {
    switch (c.kind) {
        case Cone::Kind::Zero: return "zero";
        case Cone::Kind::Free: return "free";
        case Cone::Kind::NonNeg: return "nonneg";
        case Cone::Kind::SecondOrder: return "soc";
        case Cone::Kind::RotatedSecondOrder: return "rsoc";
        case Cone::Kind::Psd: return "psd";
        case Cone::Kind::Product: return "product";
    }
    return "?";
}

}  // namespace drmdp
