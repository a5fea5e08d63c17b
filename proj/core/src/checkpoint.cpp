#include "ndpmpm/checkpoint.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "ndpmpm/error.hpp"

namespace ndpmpm {

using nlohmann::json;

void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint) {
  const Params& p = checkpoint.params;
  json line = {{"iteration", checkpoint.iteration},
               {"F", p.F},
               {"S", p.S},
               {"alpha", p.alpha},
               {"beta", p.beta},
               {"u", p.u},
               {"pi", p.pi},
               {"v", p.v},
               {"omega", p.omega},
               {"lambda", p.lambda},
               {"phi", p.phi}};
  if (checkpoint.latent) {
    line["G"] = checkpoint.latent->G;
    line["M"] = checkpoint.latent->M;
  }
  out << line.dump() << '\n';
}

Checkpoint parse_checkpoint(const std::string& text) {
  Checkpoint checkpoint;
  try {
    const json line = json::parse(text);
    checkpoint.iteration = line.at("iteration").get<std::size_t>();
    Params& p = checkpoint.params;
    p.F = line.at("F").get<int>();
    p.S = line.at("S").get<int>();
    p.alpha = line.at("alpha").get<double>();
    p.beta = line.at("beta").get<std::vector<double>>();
    p.u = line.at("u").get<std::vector<double>>();
    p.pi = line.at("pi").get<std::vector<double>>();
    p.v = line.at("v").get<std::vector<double>>();
    p.omega = line.at("omega").get<std::vector<double>>();
    p.lambda = line.at("lambda").get<std::vector<std::vector<double>>>();
    p.phi = line.at("phi").get<std::vector<std::vector<double>>>();
    if (line.contains("G")) {
      LatentState latent;
      latent.G = line.at("G").get<std::vector<int>>();
      latent.M = line.at("M").get<std::vector<std::vector<int>>>();
      checkpoint.latent = std::move(latent);
    }
    if (p.pi.size() != static_cast<std::size_t>(p.F) || p.omega.size() != static_cast<std::size_t>(p.F) * p.S)
      throw InputError("checkpoint: parameter dimensions disagree with F and S");
  } catch (const json::exception& e) {
    throw InputError(std::string("checkpoint: ") + e.what());
  }
  return checkpoint;
}

std::vector<Checkpoint> read_checkpoints(std::istream& in) {
  std::vector<Checkpoint> out;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(parse_checkpoint(line));
  return out;
}

std::vector<Checkpoint> load_checkpoints(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open checkpoint file '" + path + "'");
  return read_checkpoints(in);
}

std::vector<std::size_t> evenly_spaced(std::size_t available, std::size_t count) {
  if (count > available)
    throw InputError("requested " + std::to_string(count) + " draws but only " + std::to_string(available) +
                     " are available");
  std::vector<std::size_t> out;
  for (std::size_t l = 1; l <= count; ++l) out.push_back(l * available / count - 1);
  return out;
}

}  // namespace ndpmpm
