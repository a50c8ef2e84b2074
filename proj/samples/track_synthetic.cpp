// Renders a small synthetic sequence in memory and tracks it frame by frame.
//
//   strcf_sample [translate|scale|occlude|static] [frames]

#include <cstdio>
#include <cstdlib>
#include <string>

#include "strcf/strcf.hpp"

int main(int argc, char** argv) try {
  strcf::SynthSpec spec;
  if (argc > 1) spec.kind = strcf::parse_synth_kind(argv[1]);
  if (argc > 2) spec.frames = std::atoi(argv[2]);
  const auto seq = strcf::generate_synthetic(spec);

  auto state = strcf::init(seq.frames[0], strcf::to_region(seq.truth[0]));
  double total = 0.0;
  for (std::size_t i = 1; i < seq.frames.size(); ++i) {
    const strcf::Box box = strcf::to_box(strcf::step(state, seq.frames[i]));
    const double overlap = strcf::iou(box, seq.truth[i]);
    total += overlap;
    std::printf("frame %3zu  box %7.2f %7.2f %6.2f %6.2f  iou %.3f  variation %.3e\n", i + 1, box.x, box.y, box.w,
                box.h, overlap, state.last_variation);
  }
  std::printf("mean iou %.4f\n", total / static_cast<double>(seq.frames.size() - 1));
  return 0;
} catch (const strcf::Error& e) {
  std::fprintf(stderr, "error: %s\n", e.what());
  return 1;
}
