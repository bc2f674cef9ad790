#include "cli/app.hpp"

int main(int argc, char** argv) { return qsl::cli::run_app(argc, argv); }
