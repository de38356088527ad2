// Walks through the library on a small no-k-equal space: Betti numbers, a
// product read from JSON, the cup-length certificate and the TC_s bounds.
//
//   ring_tour [data-dir]

#include "noke/noke.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

using namespace noke;

namespace {

std::string slurp(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

int main(int argc, char** argv)
{
    const std::string dir = argc > 1 ? argv[1] : NOKE_SAMPLE_DATA;
    const Parameters p{2, 3, 6};

    std::cout << "Betti numbers of M^{(2)}_{3}(6):\n";
    for (const auto& [deg, rank] : betti(p)) std::cout << "  H^" << deg << " = Z^" << rank << '\n';

    const auto a = parse_class(slurp(dir + "/x12_3.json"));
    const auto b = parse_class(slurp(dir + "/x45_6.json"));
    const auto c = parse_class(slurp(dir + "/x23_1.json"));  // non-basic input, straightened on read
    std::cout << "\na * b = " << emit_class(multiply(a, b, p)) << '\n';
    std::cout << "c     = " << emit_class(c) << '\n';
    std::cout << "c * b = " << emit_class(multiply(c, b, p)) << '\n';

    const auto cl = cup_length(p);
    std::cout << "\ncl = " << cl.value << " (certificate verified: " << std::boolalpha << cl.witness.verified
              << ")\n  " << cl.upper_bound_argument << '\n';

    for (int s = 2; s <= 3; ++s) {
        const auto z = zcl(p, s);
        const auto tc = tc_bounds(p, s);
        std::cout << "zcl_" << s << " = " << z.value << ", " << tc.lower << " <= TC_" << s
                  << " <= " << tc.upper_improved;
        if (tc.value) std::cout << " (determined: " << *tc.value << ")";
        std::cout << '\n';
    }
    return 0;
}
