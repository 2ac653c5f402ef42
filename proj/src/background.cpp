#include "sonarpipe/background.hpp"

#include <cmath>

#include "sonarpipe/errors.hpp"

namespace sonarpipe {

void BackgroundParams::validate() const {
    if (!(var_threshold > 0.0)) throw ValidationError("background: var_threshold must be > 0");
    if (history < 1) throw ValidationError("background: history must be >= 1");
    if (max_components < 1 || max_components > 8) {
        throw ValidationError("background: max_components must be in [1, 8]");
    }
    if (!(background_ratio > 0.0 && background_ratio < 1.0)) {
        throw ValidationError("background: background_ratio must be in (0, 1)");
    }
    if (!(initial_variance > 0.0)) throw ValidationError("background: initial_variance must be > 0");
    if (!(match_threshold > 0.0)) throw ValidationError("background: match_threshold must be > 0");
    if (!(min_variance > 0.0) || !(max_variance >= min_variance)) {
        throw ValidationError("background: need 0 < min_variance <= max_variance");
    }
    if (!(complexity_prior >= 0.0 && complexity_prior < 1.0)) {
        throw ValidationError("background: complexity_prior must be in [0, 1)");
    }
}

BackgroundParams background_preset(Camera camera) {
    BackgroundParams p;
    p.var_threshold = camera == Camera::DIDSON ? 130.0 : 10.0;
    return p;
}

double learning_rate(long long frame_number, int history) {
    if (frame_number < history) return 1.0 / static_cast<double>(frame_number);
    return 1.0 / static_cast<double>(history);
}

bool update_pixel_mixture(std::span<MixtureComponent> comps, int& used, double sample, double alpha,
                          const BackgroundParams& params) {
    bool foreground = true;
    int owner = -1;
    double cumulative = 0.0;
    for (int k = 0; k < used; ++k) {
        const double d = sample - comps[k].mean;
        const double d2 = d * d;
        if (foreground && cumulative < params.background_ratio && d2 <= params.var_threshold * comps[k].variance) {
            foreground = false;
        }
        if (owner < 0 && d2 < params.match_threshold * comps[k].variance) owner = k;
        cumulative += comps[k].weight;
    }

    const double keep = 1.0 - alpha;
    const double decay = alpha * params.complexity_prior;
    for (int k = 0; k < used; ++k) {
        comps[k].weight = keep * comps[k].weight - decay;
    }
    if (owner >= 0) {
        MixtureComponent& c = comps[owner];
        c.weight += alpha;
        const double rho = std::min(1.0, alpha / c.weight);
        const double d = sample - c.mean;
        c.mean += rho * d;
        c.variance += rho * (d * d - c.variance);
        c.variance = std::clamp(c.variance, params.min_variance, params.max_variance);
    }

    int live = 0;
    for (int k = 0; k < used; ++k) {
        if (comps[k].weight > 0.0) comps[live++] = comps[k];
    }
    used = live;

    if (owner < 0) {
        // Sorted by weight, so the last slot is the lightest.
        if (used == params.max_components) --used;
        const double weight = used == 0 ? 1.0 : alpha;
        comps[used] = {weight, sample, params.initial_variance};
        ++used;
    }

    double total = 0.0;
    for (int k = 0; k < used; ++k) total += comps[k].weight;
    for (int k = 0; k < used; ++k) comps[k].weight /= total;

    // Stable insertion sort, heaviest first.
    for (int i = 1; i < used; ++i) {
        const MixtureComponent c = comps[i];
        int j = i;
        while (j > 0 && comps[j - 1].weight < c.weight) {
            comps[j] = comps[j - 1];
            --j;
        }
        comps[j] = c;
    }
    return foreground;
}

BackgroundModel::BackgroundModel(const BackgroundParams& params, int width, int height)
    : params_(params), width_(width), height_(height) {
    if (width <= 0 || height <= 0) throw ValidationError("background: frame dimensions must be positive");
    params_.validate();
    const auto pixels = static_cast<std::size_t>(width) * height;
    comps_.assign(pixels * params_.max_components, MixtureComponent{});
    used_.assign(pixels, 0);
}

BinaryMask BackgroundModel::apply(const Frame& frame) {
    if (frame.width() != width_ || frame.height() != height_) {
        throw ValidationError("background: frame " + std::to_string(frame.index) + " is " +
                              std::to_string(frame.width()) + "x" + std::to_string(frame.height()) +
                              ", model is " + std::to_string(width_) + "x" + std::to_string(height_));
    }
    if (last_index_ && frame.index <= *last_index_) {
        throw SequencingError("background: frame " + std::to_string(frame.index) + " after frame " +
                              std::to_string(*last_index_));
    }
    last_index_ = frame.index;
    ++frame_count_;
    const double alpha = learning_rate(frame_count_, params_.history);

    BinaryMask mask(width_, height_);
    const int k = params_.max_components;
    const std::size_t pixels = used_.size();
    for (std::size_t p = 0; p < pixels; ++p) {
        std::span<MixtureComponent> comps(&comps_[p * k], static_cast<std::size_t>(k));
        mask.bits[p] = update_pixel_mixture(comps, used_[p], frame.image.data[p], alpha, params_) ? 1 : 0;
    }
    return mask;
}

std::span<const MixtureComponent> BackgroundModel::components(int x, int y) const {
    const std::size_t p = static_cast<std::size_t>(y) * width_ + x;
    return {&comps_[p * params_.max_components], static_cast<std::size_t>(used_[p])};
}

}  // namespace sonarpipe
