// Generates the deterministic synthetic cohort shipped under data/synthetic:
// 43 subjects with labeled RR series whose stage-wise mean RR is coupled to
// log-glucose, a coupled DBP column, weakly coupled PSQI, and two noise
// clinical columns. Regenerate with: sleephrv-make-synthetic <out_dir>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "sleephrv/rng.hpp"

namespace fs = std::filesystem;

namespace {

constexpr std::uint32_t kSeed = 20240042;
constexpr int kSubjects = 43;

struct Block {
    const char* token;
    int length;
    double offset_ms;
};

std::string fmt(double v, int decimals) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path out_dir = argc > 1 ? argv[1] : "data/synthetic";
    fs::create_directories(out_dir / "rr");

    sleephrv::DeterministicRng rng(kSeed);

    std::ofstream clinical(out_dir / "clinical.csv");
    if (!clinical) {
        std::cerr << "cannot write " << (out_dir / "clinical.csv") << '\n';
        return 1;
    }
    clinical << "subject_id,age,glucose_mmol_L,dbp,psqi,bmi,hr_rest\n";

    for (int s = 1; s <= kSubjects; ++s) {
        char id[8];
        std::snprintf(id, sizeof(id), "S%02d", s);

        const double z = rng.normal();                      // latent glycemic factor
        const double glucose = std::exp(std::log(5.5) + 0.25 * z);
        const double age = rng.uniform(30.0, 75.0);
        const double dbp = 76.0 + 3.5 * z + rng.normal(0.0, 7.0);
        const double psqi = std::clamp(std::round(8.0 + 0.8 * z + rng.normal(0.0, 3.0)), 1.0, 21.0);
        const double bmi = 26.0 + rng.normal(0.0, 3.0);
        const double hr_rest = 66.0 + rng.normal(0.0, 6.0);

        clinical << id << ',' << fmt(age, 1) << ',' << fmt(glucose, 3) << ',' << fmt(dbp, 1)
                 << ',' << fmt(psqi, 0) << ',' << fmt(bmi, 1) << ',' << fmt(hr_rest, 1) << '\n';

        // subject-level autonomic tone: glucose-coupled plus idiosyncratic spread
        const double base_rr = 880.0 + 35.0 * z + rng.normal(0.0, 60.0);
        const double ds_off = 45.0 + rng.normal(0.0, 6.0);
        const double rem_off = -35.0 + rng.normal(0.0, 6.0);

        std::ofstream rr(out_dir / "rr" / (std::string(id) + ".rr"));
        double ar = 0.0;
        for (int cycle = 0; cycle < 3; ++cycle) {
            const Block blocks[3] = {
                {"RS", 110 + static_cast<int>(rng.uniform(0.0, 30.0)), 0.0},
                {"DS", 170 + static_cast<int>(rng.uniform(0.0, 40.0)), ds_off},
                {"REM", 90 + static_cast<int>(rng.uniform(0.0, 30.0)), rem_off},
            };
            for (const Block& block : blocks) {
                const double block_mean = base_rr + block.offset_ms + rng.normal(0.0, 6.0);
                for (int i = 0; i < block.length; ++i) {
                    ar = 0.8 * ar + rng.normal(0.0, 11.0);
                    double interval = block_mean + ar;
                    if (rng.uniform() < 0.05) {
                        interval += (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(55.0, 110.0);
                    }
                    if (rng.uniform() < 0.004) {
                        interval = rng.uniform(2400.0, 3200.0);   // ectopic-style artifact
                    }
                    interval = std::max(interval, 320.0);
                    rr << fmt(interval, 1) << ' ' << block.token << '\n';
                }
            }
        }
        if (s == 7) rr << "4500.0 RS\n";   // out-of-range flag exercised at load
    }

    std::cout << "wrote synthetic cohort for " << kSubjects << " subjects to " << out_dir << '\n';
    return 0;
}
