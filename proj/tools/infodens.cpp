#include "infodens/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return infodens::cli::run(argc, argv, std::cout, std::cerr);
}
