#include "loqs/cli.hpp"

#include <fstream>
#include <iostream>
#include <iterator>
#include <string>
#include <vector>

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    const auto result = loqs::cli::run(args, [] {
        return std::string(std::istreambuf_iterator<char>(std::cin),
                           std::istreambuf_iterator<char>());
    });
    if (result.output_path) {
        std::ofstream out(*result.output_path);
        if (!out) {
            std::cerr << "cannot write " << *result.output_path << "\n";
            return 2;
        }
        out << result.output;
    } else {
        std::cout << result.output;
    }
    return result.exit_code;
}
