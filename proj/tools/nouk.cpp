#include "nouk/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return nouk::run_cli(argc, argv, std::cout, std::cerr);
}
