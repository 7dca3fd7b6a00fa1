#include "ctnet/weights.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace ctnet {

static_assert(std::endian::native == std::endian::little,
              "weight archive I/O assumes a little-endian host");

namespace {
constexpr const char* kMagic = "CTNET-WEIGHTS v1";
}

void save_weights(const NetworkGraph& g, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot write weight archive: " + file.string());

    const Shape in = g.input_spec();
    std::ostringstream head;
    head << kMagic << "\n";
    head << "variant=" << g.variant << "\n";
    head << "input=" << in.c << "x" << in.h << "x" << in.w << "\n";
    head << "classes=" << g.class_count << "\n";
    head << "tensors=" << g.params().size() << "\n";
    std::size_t offset = 0;
    for (const Param& p : g.params()) {
        const Shape s = p.value.shape();
        head << p.name << " " << s.n << "x" << s.c << "x" << s.h << "x" << s.w << " " << offset
             << "\n";
        offset += p.value.size() * sizeof(float);
    }
    head << "END\n";
    const std::string h = head.str();
    out.write(h.data(), static_cast<std::streamsize>(h.size()));
    for (const Param& p : g.params())
        out.write(reinterpret_cast<const char*>(p.value.data()),
                  static_cast<std::streamsize>(p.value.size() * sizeof(float)));
    if (!out) throw IoError("failed writing weight archive: " + file.string());
}

LoadReport load_weights(NetworkGraph& g, const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot read weight archive: " + file.string());

    std::string line;
    if (!std::getline(in, line) || line != kMagic)
        throw IoError("not a weight archive: " + file.string());

    LoadReport report;
    std::size_t tensor_count = 0;
    struct Entry {
        std::string name;
        Shape shape;
        std::size_t offset;
    };
    std::vector<Entry> directory;
    while (std::getline(in, line)) {
        if (line == "END") break;
        const auto eq = line.find('=');
        if (eq != std::string::npos && line.find(' ') == std::string::npos) {
            const std::string key = line.substr(0, eq);
            const std::string val = line.substr(eq + 1);
            if (key == "variant") report.variant = val;
            if (key == "tensors") tensor_count = std::stoul(val);
            continue;
        }
        std::istringstream row(line);
        Entry e;
        std::string dims;
        if (!(row >> e.name >> dims >> e.offset))
            throw IoError("malformed directory line in " + file.string() + ": " + line);
        if (std::sscanf(dims.c_str(), "%dx%dx%dx%d", &e.shape.n, &e.shape.c, &e.shape.h,
                        &e.shape.w) != 4)
            throw IoError("malformed tensor shape in " + file.string() + ": " + dims);
        directory.push_back(std::move(e));
    }
    if (directory.size() != tensor_count)
        throw IoError("tensor directory truncated in " + file.string());

    const std::streampos payload_start = in.tellg();
    std::vector<bool> used(directory.size(), false);
    for (Param& p : g.params()) {
        const Entry* found = nullptr;
        for (std::size_t i = 0; i < directory.size(); ++i) {
            if (directory[i].name == p.name) {
                found = &directory[i];
                used[i] = true;
                break;
            }
        }
        if (!found) {
            report.missing.push_back(p.name);
            continue;
        }
        if (!(found->shape == p.value.shape()))
            throw ShapeError("weight '" + p.name + "': archive shape " + found->shape.str() +
                             " conflicts with graph shape " + p.value.shape().str());
        in.seekg(payload_start + static_cast<std::streamoff>(found->offset));
        in.read(reinterpret_cast<char*>(p.value.data()),
                static_cast<std::streamsize>(p.value.size() * sizeof(float)));
        if (!in) throw IoError("truncated payload for '" + p.name + "' in " + file.string());
        report.matched.push_back(p.name);
    }
    for (std::size_t i = 0; i < directory.size(); ++i)
        if (!used[i]) report.unused.push_back(directory[i].name);
    return report;
}

void save_sidecar(const std::filesystem::path& file,
                  const std::vector<std::pair<std::string, std::string>>& kv) {
    std::ofstream out(file);
    if (!out) throw IoError("cannot write sidecar: " + file.string());
    for (const auto& [k, v] : kv) out << k << "=" << v << "\n";
}

std::map<std::string, std::string> load_sidecar(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot read sidecar: " + file.string());
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

}  // namespace ctnet
