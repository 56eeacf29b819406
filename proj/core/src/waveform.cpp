#include "setml/waveform.hpp"

#include <stdexcept>

namespace setml {

void Waveform::validate() const {
    if (let_value <= 0.0)
        throw std::invalid_argument("waveform: let_value must be positive");
    if (vd < 0.0)
        throw std::invalid_argument("waveform: vd must be non-negative");
    if (samples.size() < 4)
        throw std::invalid_argument("waveform: needs at least 4 samples");
    for (std::size_t k = 1; k < samples.size(); ++k) {
        if (!(samples[k].t > samples[k - 1].t))
            throw std::invalid_argument("waveform: sample times must be strictly increasing");
    }
}

}  // namespace setml
