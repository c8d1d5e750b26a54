#include <iostream>
#include <string>
#include <vector>

#include "actlearn/cli.hpp"

int main(int argc, char** argv) {
    return actlearn::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
