#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "test_paths.hpp"

namespace testpaths {
std::string argv0;  // set before doctest runs so tests can locate the CLI
}

int main(int argc, char** argv) {
    testpaths::argv0 = argv[0];
    return doctest::Context(argc, argv).run();
}
