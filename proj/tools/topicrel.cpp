#include <iostream>

#include "topicrel/cli.hpp"

int main(int argc, char** argv) {
    return topicrel::run_cli(argc, argv, std::cout, std::cerr);
}
