// Writes one exported spec per line for every chart of a few synthetic tables.
#include "t2c/corpus.hpp"
#include "t2c/vegalite.hpp"

#include <fstream>
#include <iostream>

using namespace t2c;

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: vegalite_dump <out.jsonl>\n";
        return 2;
    }
    std::ofstream out(argv[1]);
    SynthSpec spec;
    spec.size = 24;
    spec.mix = {0.2, 0.2, 0.2, 0.2, 0.1, 0.1};
    HardConstraints caps;
    caps.max_y.fill(3);
    caps.max_x.fill(2);
    std::size_t n = 0;
    for (const CorpusEntry& e : synth_corpus(spec)) {
        const auto charts = enumerate_all_charts(*e.table, caps, default_max_len(caps));
        // large enumerations are sampled every 7th chart
        for (std::size_t i = 0; i < charts.size(); i += charts.size() > 40 ? 7 : 1) {
            const ChartSequence& c = charts[i];
            out << export_vegalite(*e.table, c).dump() << "\n";
            ++n;
        }
    }
    std::cout << n << " specs\n";
    return n > 0 ? 0 : 1;
}
