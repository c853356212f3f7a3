#pragma once

#include <string>
#include <vector>

namespace acceptance {

struct Result {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
    double budget = 0.0;  // seconds allowed
};

// empty `only` runs all eleven
std::vector<Result> run(int workers, const std::vector<int>& only = {});
std::string line(const Result& r);

}  // namespace acceptance
