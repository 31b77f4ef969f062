#include "chartnet/serialize.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "chartnet/errors.hpp"
#include "chartnet/numfmt.hpp"

namespace chartnet {

std::string network_to_json(const ReluNetwork& net) {
  std::ostringstream out;
  out << "{\"input_dim\":" << net.input_dim() << ",\"output_dim\":" << net.output_dim()
      << ",\"layers\":[";
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    const SparseLayer& layer = net.layers()[l];
    if (l) out << ",";
    out << "{\"rows\":" << layer.rows() << ",\"cols\":" << layer.cols() << ",\"triplets\":[";
    for (std::size_t k = 0; k < layer.triplets().size(); ++k) {
      const Triplet& t = layer.triplets()[k];
      if (k) out << ",";
      out << "[" << t.row << "," << t.col << "," << fmt_double(t.value) << "]";
    }
    out << "],\"bias\":[";
    for (int i = 0; i < layer.rows(); ++i) {
      if (i) out << ",";
      out << fmt_double(layer.bias()[i]);
    }
    out << "],\"activation\":\""
        << (layer.activation() == Activation::Relu ? "relu" : "identity") << "\"}";
  }
  out << "]}";
  return out.str();
}

ReluNetwork network_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("network file is not valid JSON: ") + e.what());
  }
  try {
    const int input_dim = doc.at("input_dim").get<int>();
    const int output_dim = doc.at("output_dim").get<int>();
    std::vector<SparseLayer> layers;
    for (const auto& jl : doc.at("layers")) {
      const int rows = jl.at("rows").get<int>();
      const int cols = jl.at("cols").get<int>();
      std::vector<Triplet> triplets;
      for (const auto& jt : jl.at("triplets"))
        triplets.push_back({jt.at(0).get<int>(), jt.at(1).get<int>(), jt.at(2).get<double>()});
      const auto& jb = jl.at("bias");
      Eigen::VectorXd bias(static_cast<Eigen::Index>(jb.size()));
      for (std::size_t i = 0; i < jb.size(); ++i) bias[static_cast<Eigen::Index>(i)] = jb[i].get<double>();
      const std::string act = jl.at("activation").get<std::string>();
      if (act != "relu" && act != "identity")
        throw IoError("unknown activation '" + act + "'");
      layers.emplace_back(rows, cols, std::move(triplets), std::move(bias),
                          act == "relu" ? Activation::Relu : Activation::Identity);
    }
    ReluNetwork net(std::move(layers));
    if (net.input_dim() != input_dim || net.output_dim() != output_dim)
      throw IoError("declared network dimensions disagree with layer shapes");
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed network document: ") + e.what());
  }
}

void save_network(const ReluNetwork& net, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << network_to_json(net) << "\n";
  if (!out) throw IoError("failed writing '" + path + "'");
}

ReluNetwork load_network(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return network_from_json(buf.str());
}

}  // namespace chartnet
