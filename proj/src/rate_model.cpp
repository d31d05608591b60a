#include "v2xalloc/rate_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace v2x {

Eigen::VectorXd PowerProfile::joined() const {
    Eigen::VectorXd out(pc.size() + pv.size());
    out << pc, pv;
    return out;
}

PowerProfile PowerProfile::split(const Eigen::Ref<const Eigen::VectorXd>& joint, int m) {
    return {joint.head(m), joint.tail(joint.size() - m)};
}

bool PowerProfile::feasible(const SystemConfig& cfg) const {
    if (pc.size() != cfg.m_cellular || pv.size() != cfg.k_v2v) return false;
    return (pc.array() >= 0.0).all() && (pc.array() <= cfg.pmax_c).all() &&
           (pv.array() >= 0.0).all() && (pv.array() <= cfg.pmax_v).all();
}

PowerProfile Amplitudes::power(int m) const {
    const Eigen::VectorXd p = v.array().square();
    return PowerProfile::split(p, m);
}

Eigen::VectorXd priority_weights(const SystemConfig& cfg) {
    Eigen::VectorXd alpha(cfg.users());
    for (int i = 0; i < cfg.users(); ++i) alpha(i) = cfg.weight(i);
    return alpha;
}

double sinr_cellular(const ChannelRealization& real, const PowerProfile& p,
                     const SystemConfig& cfg, int m) {
    if (m < 0 || m >= real.m())
        throw std::out_of_range("sinr_cellular: index " + std::to_string(m) + " out of range");
    double interference = 0.0;
    for (int n = 0; n < real.m(); ++n)
        if (n != m) interference += p.pc(n) * real.hc(n);
    for (int k = 0; k < real.k(); ++k) interference += p.pv(k) * real.hvb(k);
    return p.pc(m) * real.hc(m) / (interference + cfg.noise_var);
}

double sinr_v2v(const ChannelRealization& real, const PowerProfile& p, const SystemConfig& cfg,
                int k) {
    if (k < 0 || k >= real.k())
        throw std::out_of_range("sinr_v2v: index " + std::to_string(k) + " out of range");
    double interference = 0.0;
    for (int l = 0; l < real.k(); ++l)
        if (l != k) interference += p.pv(l) * real.gcross(l, k);
    for (int m = 0; m < real.m(); ++m) interference += p.pc(m) * real.hcv(m, k);
    return p.pv(k) * real.gd(k) / (interference + cfg.noise_var);
}

Eigen::VectorXd sinr_all(const Eigen::MatrixXd& gains, const Eigen::VectorXd& power,
                         double noise_var) {
    const Eigen::Index n = power.size();
    Eigen::VectorXd out(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double interference = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            if (i != j) interference += power(i) * gains(i, j);
        out(j) = gains(j, j) * power(j) / (interference + noise_var);
    }
    return out;
}

double weighted_sum_rate(const Eigen::MatrixXd& gains, const Eigen::VectorXd& power,
                         const SystemConfig& cfg) {
    const Eigen::VectorXd sinr = sinr_all(gains, power, cfg.noise_var);
    double total = 0.0;
    for (Eigen::Index i = 0; i < sinr.size(); ++i)
        total += cfg.weight(static_cast<int>(i)) * std::log1p(sinr(i));
    return total;
}

double weighted_sum_rate(const ChannelRealization& real, const PowerProfile& p,
                         const SystemConfig& cfg) {
    double total = 0.0;
    for (int m = 0; m < real.m(); ++m)
        total += cfg.weight_c[m] * std::log1p(sinr_cellular(real, p, cfg, m));
    for (int k = 0; k < real.k(); ++k)
        total += cfg.weight_v[k] * std::log1p(sinr_v2v(real, p, cfg, k));
    return total;
}

Eigen::VectorXd mse_all(const Eigen::MatrixXd& gains, const Amplitudes& amp, double noise_var) {
    const Eigen::Index n = amp.v.size();
    const Eigen::VectorXd v2 = amp.v.array().square();
    Eigen::VectorXd out(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double u = amp.u(j);
        const double desired = u * std::sqrt(gains(j, j)) * amp.v(j) - 1.0;
        double interference = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            if (i != j) interference += gains(i, j) * v2(i);
        out(j) = desired * desired + u * u * (interference + noise_var);
    }
    return out;
}

double mse_user(const ChannelRealization& real, const Amplitudes& amp, const SystemConfig& cfg,
                UserRef user) {
    const int m_count = real.m();
    const auto& v = amp.v;
    if (user.cls == LinkClass::Cellular) {
        const int m = user.index;
        if (m < 0 || m >= m_count) throw std::out_of_range("mse_user: cellular index out of range");
        const double u = amp.u(m);
        const double d = u * std::sqrt(real.hc(m)) * v(m) - 1.0;
        double total = d * d;
        for (int n = 0; n < m_count; ++n)
            if (n != m) total += u * u * real.hc(n) * v(n) * v(n);
        for (int k = 0; k < real.k(); ++k)
            total += u * u * real.hvb(k) * v(m_count + k) * v(m_count + k);
        return total + cfg.noise_var * u * u;
    }
    const int k = user.index;
    if (k < 0 || k >= real.k()) throw std::out_of_range("mse_user: V2V index out of range");
    const double u = amp.u(m_count + k);
    const double d = u * std::sqrt(real.gd(k)) * v(m_count + k) - 1.0;
    double total = d * d;
    for (int l = 0; l < real.k(); ++l)
        if (l != k) total += u * u * real.gcross(l, k) * v(m_count + l) * v(m_count + l);
    for (int m = 0; m < m_count; ++m) total += u * u * real.hcv(m, k) * v(m) * v(m);
    return total + cfg.noise_var * u * u;
}

double wmmse_objective(const Eigen::MatrixXd& gains, const Amplitudes& amp,
                       const SystemConfig& cfg) {
    const Eigen::VectorXd eps = mse_all(gains, amp, cfg.noise_var);
    double total = 0.0;
    for (Eigen::Index i = 0; i < eps.size(); ++i)
        total += cfg.weight(static_cast<int>(i)) * (amp.w(i) * eps(i) - std::log(amp.w(i)));
    return total;
}

double wmmse_objective(const ChannelRealization& real, const Amplitudes& amp,
                       const SystemConfig& cfg) {
    double total = 0.0;
    for (int i = 0; i < cfg.users(); ++i) {
        const UserRef user = i < cfg.m_cellular ? UserRef{LinkClass::Cellular, i}
                                                : UserRef{LinkClass::V2V, i - cfg.m_cellular};
        total += cfg.weight(i) * (amp.w(i) * mse_user(real, amp, cfg, user) - std::log(amp.w(i)));
    }
    return total;
}

}  // namespace v2x
