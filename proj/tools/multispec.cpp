/**
 * @file multispec.cpp
 * @brief Entry point of the `multispec` command-line tool.
 */

#include <exception>
#include <iostream>

#include "multispec/cli.hpp"

int main(int argc, char** argv) {
    try {
        return multispec::cli::dispatch(argc, argv, std::cout, std::cerr);
    } catch (const multispec::precondition_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return multispec::cli::exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return multispec::cli::exit_check_failed;
    }
}
