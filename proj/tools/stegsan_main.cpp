#include "stegsan/app/commands.hpp"

int main(int argc, char** argv) { return stegsan::app::run_cli(argc, argv); }
