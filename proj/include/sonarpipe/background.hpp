#pragma once

#include <optional>
#include <span>
#include <vector>

#include "sonarpipe/types.hpp"

namespace sonarpipe {

/// Adaptive per-pixel Gaussian mixture (Zivkovic & van der Heijden 2006).
struct BackgroundParams {
    double var_threshold = 130.0;      // squared Mahalanobis distance for the background decision
    int history = 500;                 // steady-state learning rate is 1/history
    int max_components = 5;
    double background_ratio = 0.9;     // weight mass that counts as background
    double initial_variance = 15.0;
    double match_threshold = 9.0;      // squared Mahalanobis distance for "sample fits a component"
    double min_variance = 4.0;
    double max_variance = 75.0;
    double complexity_prior = 0.05;    // c_T; weights decay by alpha*c_T each frame

    void validate() const;

    friend bool operator==(const BackgroundParams&, const BackgroundParams&) = default;
};

/// Camera presets: var_threshold 130 for DIDSON, 10 for ARIS, defaults otherwise.
BackgroundParams background_preset(Camera camera);

struct MixtureComponent {
    double weight = 0.0;
    double mean = 0.0;
    double variance = 0.0;

    friend bool operator==(const MixtureComponent&, const MixtureComponent&) = default;
};

/// Learning rate for the n-th frame (1-based): 1/n during warm-up, then 1/history.
double learning_rate(long long frame_number, int history);

/// One pixel's mixture update. `comps` holds `used` components sorted by
/// descending weight and has room for params.max_components. Returns true
/// when `sample` is foreground under the model as it stood before the update.
///
/// Per frame:
///  - foreground unless some component k, scanned in weight order while the
///    cumulative weight before k is < background_ratio, has
///    (x - mean_k)^2 <= var_threshold * var_k;
///  - the first component with (x - mean)^2 < match_threshold * var "owns" x;
///  - w_k <- (1 - a) w_k - a c_T, plus a for the owner; the owner's mean and
///    variance move by rho = a / w_owner (variance clamped to
///    [min_variance, max_variance]);
///  - components with w <= 0 are dropped;
///  - with no owner, a component (x, initial_variance, weight a, or 1 when the
///    mixture is empty) is added, replacing the lightest one when full;
///  - weights are renormalised to sum 1 and stably re-sorted.
bool update_pixel_mixture(std::span<MixtureComponent> comps, int& used, double sample, double alpha,
                          const BackgroundParams& params);

class BackgroundModel {
public:
    /// Throws ValidationError for non-positive dimensions or invalid params.
    BackgroundModel(const BackgroundParams& params, int width, int height);

    /// Classifies `frame` and updates the model. Frames must arrive with
    /// strictly increasing indices (SequencingError) at the model's size
    /// (ValidationError).
    BinaryMask apply(const Frame& frame);

    int width() const { return width_; }
    int height() const { return height_; }
    long long frame_count() const { return frame_count_; }
    const BackgroundParams& params() const { return params_; }

    /// Live components of pixel (x, y), heaviest first.
    std::span<const MixtureComponent> components(int x, int y) const;

    friend bool operator==(const BackgroundModel&, const BackgroundModel&) = default;

private:
    BackgroundParams params_;
    int width_;
    int height_;
    long long frame_count_ = 0;
    std::optional<int> last_index_;
    std::vector<MixtureComponent> comps_;
    std::vector<int> used_;
};

}  // namespace sonarpipe
