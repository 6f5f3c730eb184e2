// Spreading on a five-node star. Prints the spectral verdict for two
// healing rates and the hub's infection probability over time.

#include <cstdio>

#include "transnn/transnn.hpp"

using namespace transnn;

int main() {
    Matrix star(5, 5);
    for (std::size_t leaf = 1; leaf < 5; ++leaf) star(0, leaf) = star(leaf, 0) = 1.0;

    for (double delta : {0.5, 0.2}) {
        const double beta = 0.2;
        const TransmissionNetwork net = homogeneous_network(star, delta, beta);
        const ThresholdReport rep = extinction_check(net);
        std::printf("delta=%.1f beta=%.1f: radius %.4f, %s\n", delta, beta, rep.spectral_radius,
                    std::string(to_string(rep.verdict)).c_str());

        const ProbabilityState p0({1.0, 0.0, 0.0, 0.0, 0.0});
        simulate_streaming(net, p0, 60, Representation::Probability, [](std::size_t k, const Vector& p) {
            if (k % 10 == 0) std::printf("  step %2zu  hub %.6f  leaf %.6f\n", k, p[0], p[1]);
            return true;
        });
    }
}
