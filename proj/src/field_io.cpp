#include "thickspray/field_io.hpp"

#include "thickspray/error.hpp"

#include <json.hpp>

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace thickspray {

namespace fs = std::filesystem;

namespace {

void to_little_endian(std::vector<unsigned char>& bytes) {
    if constexpr (std::endian::native == std::endian::big) {
        for (std::size_t i = 0; i + 8 <= bytes.size(); i += 8)
            for (int a = 0; a < 4; ++a) std::swap(bytes[i + a], bytes[i + 7 - a]);
    }
}

}  // namespace

void write_field_dump(const std::string& dir, const std::string& stem, const std::string& field_name,
                      const std::vector<double>& values, const std::vector<std::size_t>& shape,
                      const PhaseGrid& grid, double time) {
    fs::create_directories(dir);
    std::vector<unsigned char> bytes(values.size() * sizeof(double));
    std::memcpy(bytes.data(), values.data(), bytes.size());
    to_little_endian(bytes);
    std::ofstream bin(fs::path(dir) / (stem + ".bin"), std::ios::binary);
    bin.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!bin) throw Error(ErrorKind::Config, "cannot write " + stem + ".bin in " + dir);

    nlohmann::json meta;
    meta["shape"] = shape;
    meta["d"] = grid.d;
    meta["Nx"] = grid.Nx;
    meta["Nv"] = grid.Nv;
    meta["Vmax"] = grid.Vmax;
    meta["time"] = time;
    meta["field_name"] = field_name;
    meta["endianness"] = "little";
    meta["dtype"] = "float64";
    std::ofstream side(fs::path(dir) / (stem + ".json"));
    side << meta.dump(2) << "\n";
    if (!side) throw Error(ErrorKind::Config, "cannot write " + stem + ".json in " + dir);
}

std::vector<double> read_field_dump(const std::string& dir, const std::string& stem,
                                    std::vector<std::size_t>* shape) {
    std::ifstream side(fs::path(dir) / (stem + ".json"));
    if (!side) throw Error(ErrorKind::Config, "missing sidecar " + stem + ".json");
    auto meta = nlohmann::json::parse(side);
    auto dims = meta.at("shape").get<std::vector<std::size_t>>();
    std::size_t count = 1;
    for (auto s : dims) count *= s;
    std::vector<unsigned char> bytes(count * sizeof(double));
    std::ifstream bin(fs::path(dir) / (stem + ".bin"), std::ios::binary);
    bin.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!bin) throw Error(ErrorKind::Config, "short read of " + stem + ".bin");
    to_little_endian(bytes);
    std::vector<double> values(count);
    std::memcpy(values.data(), bytes.data(), bytes.size());
    if (shape) *shape = dims;
    return values;
}

}  // namespace thickspray
