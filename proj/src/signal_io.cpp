#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

#include "tfa/signal.hpp"

namespace tfa {

namespace {

constexpr std::uint64_t kMagic = 0x3130474953414654ULL;  // "TFASIG01"
constexpr std::uint64_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "binary signal IO assumes little endian");

template <class T>
void put(std::ofstream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::ifstream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw std::runtime_error("truncated signal file");
  return v;
}

}  // namespace

void write_signal_binary(const std::string& path, const Signal& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  put<std::uint64_t>(os, kMagic);
  put<std::uint64_t>(os, kVersion);
  put<std::uint64_t>(os, static_cast<std::uint64_t>(f.size()));
  put<double>(os, f.period);
  put<double>(os, f.origin);
  for (int r = 0; r < 3; ++r) put<std::uint64_t>(os, 0);
  for (const auto& z : f.x) {
    put<float>(os, static_cast<float>(z.real()));
    put<float>(os, static_cast<float>(z.imag()));
  }
}

Signal read_signal_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  if (get<std::uint64_t>(is) != kMagic) throw std::runtime_error("bad signal magic in " + path);
  if (get<std::uint64_t>(is) != kVersion) throw std::runtime_error("unsupported signal version");
  auto N = get<std::uint64_t>(is);
  double period = get<double>(is);
  double origin = get<double>(is);
  for (int r = 0; r < 3; ++r) get<std::uint64_t>(is);
  Signal f = make_signal(static_cast<int>(N), period, origin);
  for (auto& z : f.x) {
    float re = get<float>(is), im = get<float>(is);
    z = cplx(re, im);
  }
  return f;
}

std::string signal_to_json(const Signal& f) {
  nlohmann::json j;
  j["N"] = f.size();
  j["period"] = f.period;
  j["origin"] = f.origin;
  std::vector<double> re, im;
  for (const auto& z : f.x) {
    re.push_back(z.real());
    im.push_back(z.imag());
  }
  j["re"] = re;
  j["im"] = im;
  return j.dump();
}

Signal signal_from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  Signal f = make_signal(j.at("N").get<int>(), j.value("period", 1.0), j.value("origin", 0.0));
  auto re = j.at("re").get<std::vector<double>>();
  auto im = j.contains("im") ? j.at("im").get<std::vector<double>>() : std::vector<double>(re.size(), 0.0);
  if (static_cast<int>(re.size()) != f.size() || re.size() != im.size())
    throw std::runtime_error("signal JSON length mismatch");
  for (int n = 0; n < f.size(); ++n) f.x[n] = cplx(re[n], im[n]);
  return f;
}

}  // namespace tfa
