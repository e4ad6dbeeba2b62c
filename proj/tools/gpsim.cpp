#include "gpsim/experiments.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return gpsim::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
