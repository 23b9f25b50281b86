#include "rtlkit/cli/app.hpp"

int main(int argc, char** argv) { return rtlkit::cli::dispatch(argc, argv); }
