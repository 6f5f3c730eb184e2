// Fits a Gaussian bump with single-hidden-layer TransNN approximators of
// growing width and reports the uniform error of each.

#include <cstdio>

#include "transnn/transnn.hpp"

using namespace transnn;
using namespace transnn::learn;

int main() {
    UniversalConfig cfg;
    cfg.epochs = 1000;
    cfg.eval_points = 2001;
    cfg.rational = true;
    const Target target = gaussian_bump_target();
    std::printf("%-6s %-12s %-12s %s\n", "width", "sup_error", "train_mse", "rational_sup_error");
    for (std::size_t width : {2u, 4u, 8u, 16u, 32u}) {
        const UniversalFit fit = fit_universal(target, width, cfg);
        std::printf("%-6zu %-12.4e %-12.4e %.4e\n", width, fit.sup_error, fit.train_mse, fit.rational->sup_error);
    }
}
