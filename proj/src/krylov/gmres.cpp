#include "pintflow/krylov/gmres.hpp"

#include <fstream>
#include <iomanip>

namespace pintflow {

void write_residual_csv(const std::string& path, const std::vector<double>& history) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open " + path + " for writing");
    out << "iteration,residual\n" << std::setprecision(17);
    for (std::size_t i = 0; i < history.size(); ++i) out << i << ',' << history[i] << '\n';
}

}  // namespace pintflow
