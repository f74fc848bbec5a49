#include "jha/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return jha::cli::run(argc, argv, std::cout, std::cerr);
}
