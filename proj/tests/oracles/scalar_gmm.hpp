#pragma once

// Reference single-pixel Gaussian mixture, written independently of the
// library's strided per-frame implementation. It follows the same update
// recipe step by step so that masks agree bit for bit.

#include <algorithm>
#include <vector>

namespace oracle {

struct GmmSettings {
    double var_threshold;
    int history;
    int max_components;
    double background_ratio;
    double initial_variance;
    double match_threshold;
    double min_variance;
    double max_variance;
    double complexity_prior;
};

class ScalarGmm {
public:
    explicit ScalarGmm(const GmmSettings& s) : s_(s) {}

    /// Returns true for foreground.
    bool step(double x) {
        ++n_;
        const double a = n_ < s_.history ? 1.0 / static_cast<double>(n_) : 1.0 / static_cast<double>(s_.history);

        bool background = false;
        double seen = 0.0;
        for (const auto& g : mix_) {
            const double dx = x - g.mu;
            if (seen < s_.background_ratio && dx * dx <= s_.var_threshold * g.var) {
                background = true;
                break;
            }
            seen += g.w;
        }

        int hit = -1;
        for (std::size_t k = 0; k < mix_.size(); ++k) {
            const double dx = x - mix_[k].mu;
            if (dx * dx < s_.match_threshold * mix_[k].var) {
                hit = static_cast<int>(k);
                break;
            }
        }

        for (auto& g : mix_) g.w = (1.0 - a) * g.w - a * s_.complexity_prior;
        if (hit >= 0) {
            Gauss& g = mix_[hit];
            g.w += a;
            const double rho = std::min(1.0, a / g.w);
            const double dx = x - g.mu;
            g.mu += rho * dx;
            g.var += rho * (dx * dx - g.var);
            if (g.var < s_.min_variance) g.var = s_.min_variance;
            if (g.var > s_.max_variance) g.var = s_.max_variance;
        }

        mix_.erase(std::remove_if(mix_.begin(), mix_.end(), [](const Gauss& g) { return !(g.w > 0.0); }),
                   mix_.end());

        if (hit < 0) {
            if (static_cast<int>(mix_.size()) == s_.max_components) mix_.pop_back();
            mix_.push_back({mix_.empty() ? 1.0 : a, x, s_.initial_variance});
        }

        double total = 0.0;
        for (const auto& g : mix_) total += g.w;
        for (auto& g : mix_) g.w /= total;
        std::stable_sort(mix_.begin(), mix_.end(), [](const Gauss& l, const Gauss& r) { return l.w > r.w; });

        return !background;
    }

    std::size_t size() const { return mix_.size(); }

private:
    struct Gauss {
        double w;
        double mu;
        double var;
    };
    GmmSettings s_;
    long long n_ = 0;
    std::vector<Gauss> mix_;
};

}  // namespace oracle
