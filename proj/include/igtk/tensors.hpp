#pragma once

#include <Eigen/Dense>

namespace igtk {

// Dense rank-3 tensor over a d-dimensional index set, flat row-major storage.
class Tensor3 {
public:
    Tensor3() = default;
    explicit Tensor3(int d) : d_(d), v_(Eigen::VectorXd::Zero(d * d * d)) {}

    int dim() const { return d_; }
    double& operator()(int i, int j, int k) { return v_[(i * d_ + j) * d_ + k]; }
    double operator()(int i, int j, int k) const { return v_[(i * d_ + j) * d_ + k]; }

    Eigen::VectorXd& flat() { return v_; }
    const Eigen::VectorXd& flat() const { return v_; }

    void setZero() { v_.setZero(); }
    double max_abs() const { return v_.size() ? v_.lpNorm<Eigen::Infinity>() : 0.0; }

    Tensor3& operator+=(const Tensor3& o) { v_ += o.v_; return *this; }
    Tensor3& operator-=(const Tensor3& o) { v_ -= o.v_; return *this; }
    Tensor3& operator*=(double a) { v_ *= a; return *this; }
    friend Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
    friend Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }
    friend Tensor3 operator*(double a, Tensor3 t) { return t *= a; }

private:
    int d_ = 0;
    Eigen::VectorXd v_;
};

// Dense rank-4 tensor, flat row-major storage.
class Tensor4 {
public:
    Tensor4() = default;
    explicit Tensor4(int d) : d_(d), v_(Eigen::VectorXd::Zero(d * d * d * d)) {}

    int dim() const { return d_; }
    double& operator()(int i, int j, int k, int l) { return v_[((i * d_ + j) * d_ + k) * d_ + l]; }
    double operator()(int i, int j, int k, int l) const {
        return v_[((i * d_ + j) * d_ + k) * d_ + l];
    }

    Eigen::VectorXd& flat() { return v_; }
    const Eigen::VectorXd& flat() const { return v_; }

    void setZero() { v_.setZero(); }
    double max_abs() const { return v_.size() ? v_.lpNorm<Eigen::Infinity>() : 0.0; }

    Tensor4& operator+=(const Tensor4& o) { v_ += o.v_; return *this; }
    Tensor4& operator-=(const Tensor4& o) { v_ -= o.v_; return *this; }
    Tensor4& operator*=(double a) { v_ *= a; return *this; }
    friend Tensor4 operator+(Tensor4 a, const Tensor4& b) { return a += b; }
    friend Tensor4 operator-(Tensor4 a, const Tensor4& b) { return a -= b; }
    friend Tensor4 operator*(double a, Tensor4 t) { return t *= a; }

private:
    int d_ = 0;
    Eigen::VectorXd v_;
};

// Average over all 6 index permutations.
Tensor3 symmetrize_full(const Tensor3& t);
// Average over all 24 index permutations.
Tensor4 symmetrize_full(const Tensor4& t);
// Average over the first index pair (i,j).
Tensor3 symmetrize_pair12(const Tensor3& t);
// Average over (i,j), (k,l), and the pair swap (ij)<->(kl).
Tensor4 symmetrize_pairs_and_swap(const Tensor4& t);
// Average over (i,j) and (k,l) only.
Tensor4 symmetrize_pairs(const Tensor4& t);

}  // namespace igtk
