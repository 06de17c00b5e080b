#include <cstdio>
#include <filesystem>

#include "motionkit/error.hpp"
#include "motionkit/synthetic.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: motionkit-demo-data OUTPUT_DIR\n");
    return 1;
  }
  try {
    motionkit::synthetic::write_demo_corpus(argv[1]);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  std::printf("wrote demo corpus to %s\n", argv[1]);
  return 0;
}
