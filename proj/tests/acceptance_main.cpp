// Runs the full verification suite and prints one pass/fail line per
// criterion. Exit code 0 when everything holds, 2 otherwise.

#include <cstring>
#include <iostream>
#include <string>

#include "statusloop/acceptance.hpp"

int main(int argc, char** argv) {
  statusloop::AcceptanceOptions options;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--quick") {
      options.quick = true;
    } else if (arg == "--out" && i + 1 < argc) {
      options.out_dir = argv[++i];
    } else if (arg == "--threads" && i + 1 < argc) {
      options.threads = static_cast<unsigned>(std::stoul(argv[++i]));
    } else {
      std::cerr << "usage: " << argv[0] << " [--quick] [--out DIR] [--threads N]\n";
      return 1;
    }
  }

  std::cout << "verification suite (" << (options.quick ? "quick: 3 seeds, horizon 1000"
                                                        : "10 seeds, horizon 5000")
            << ")\n";
  const statusloop::AcceptanceOutcome outcome =
      statusloop::run_acceptance(options, &std::cout);
  statusloop::print_acceptance(std::cout, outcome);
  return outcome.all_passed() ? 0 : 2;
}
