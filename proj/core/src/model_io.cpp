#include "hfq/model_io.hpp"

#include "detail/json_util.hpp"
#include "hfq/error.hpp"


namespace hfq {

using detail::json;

namespace {

json joint_to_json(const JointModel& m) {
  return {{"feature_space", detail::to_json(m.space)},
          {"hyperparameters", detail::to_json(m.hyper)},
          {"seed", m.seed},
          {"shape",
           {{"classes", m.phi.size()}, {"machine", m.theta_m.cols()}, {"human", m.theta_h.cols()}}},
          {"theta_m", detail::flatten(m.theta_m)},
          {"theta_h", detail::flatten(m.theta_h)},
          {"phi", detail::flatten(m.phi)}};
}

JointModel joint_from(const json& j) {
  JointModel m;
  m.space = detail::space_from(j.at("feature_space"));
  m.hyper = detail::hyper_from(j.at("hyperparameters"));
  m.seed = j.at("seed").get<std::uint64_t>();
  const auto& shape = j.at("shape");
  const auto k = shape.at("classes").get<Eigen::Index>();
  const auto dm = shape.at("machine").get<Eigen::Index>();
  const auto dh = shape.at("human").get<Eigen::Index>();
  m.theta_m = detail::unflatten(j.at("theta_m"), k, dm, "theta_m");
  m.theta_h = detail::unflatten(j.at("theta_h"), k, dh, "theta_h");
  m.phi = detail::vector_from(j.at("phi"), k, "phi");
  m.validate();
  return m;
}

json conditionals_to_json(const ConditionalModels& c) {
  json hyper = json::array();
  for (const auto& h : c.hyper) hyper.push_back(detail::to_json(h));
  json bias_only = json::array();
  for (bool b : c.bias_only) bias_only.push_back(b);
  return {{"shape", {{"human", c.weights.rows()}, {"machine", c.weights.cols()}}},
          {"weights", detail::flatten(c.weights)},
          {"intercepts", detail::flatten(c.intercepts)},
          {"hyperparameters", hyper},
          {"bias_only", bias_only}};
}

ConditionalModels conditionals_from(const json& j) {
  ConditionalModels c;
  const auto dh = j.at("shape").at("human").get<Eigen::Index>();
  const auto dm = j.at("shape").at("machine").get<Eigen::Index>();
  c.weights = detail::unflatten(j.at("weights"), dh, dm, "conditional weights");
  c.intercepts = detail::vector_from(j.at("intercepts"), dh, "conditional intercepts");
  for (const auto& h : j.at("hyperparameters")) c.hyper.push_back(detail::hyper_from(h));
  for (const auto& b : j.at("bias_only")) c.bias_only.push_back(b.get<bool>());
  c.validate();
  return c;
}

json masked_to_json(const MaskedModel& m) {
  return {{"budget", m.trained_budget},
          {"hyperparameters", detail::to_json(m.hyper)},
          {"seed", m.seed},
          {"shape",
           {{"classes", m.phi_bar.size()},
            {"machine", m.theta_m_bar.cols()},
            {"human", m.theta_h_bar.cols()}}},
          {"theta_m_bar", detail::flatten(m.theta_m_bar)},
          {"theta_h_bar", detail::flatten(m.theta_h_bar)},
          {"phi_bar", detail::flatten(m.phi_bar)}};
}

MaskedModel masked_from(const json& j) {
  MaskedModel m;
  m.trained_budget = j.at("budget").get<std::size_t>();
  m.hyper = detail::hyper_from(j.at("hyperparameters"));
  m.seed = j.at("seed").get<std::uint64_t>();
  const auto& shape = j.at("shape");
  const auto k = shape.at("classes").get<Eigen::Index>();
  m.theta_m_bar = detail::unflatten(j.at("theta_m_bar"), k, shape.at("machine").get<Eigen::Index>(), "theta_m_bar");
  m.theta_h_bar = detail::unflatten(j.at("theta_h_bar"), k, shape.at("human").get<Eigen::Index>(), "theta_h_bar");
  m.phi_bar = detail::vector_from(j.at("phi_bar"), k, "phi_bar");
  m.validate();
  return m;
}

}  // namespace

const MaskedModel* ModelBundle::masked_for(std::size_t budget) const {
  for (const auto& m : masked) {
    if (m.trained_budget == budget) return &m;
  }
  return nullptr;
}

void ModelBundle::validate() const {
  joint.validate();
  conditionals.validate();
  require(conditionals.human_dim() == joint.space.human_dim() &&
              conditionals.machine_dim() == joint.space.machine_dim(),
          ErrorCode::invalid_input, "conditional models do not match the joint model");
  for (const auto& m : masked) {
    m.validate();
    require(m.theta_m_bar.cols() == joint.theta_m.cols() && m.theta_h_bar.cols() == joint.theta_h.cols() &&
                m.phi_bar.size() == joint.phi.size(),
            ErrorCode::invalid_input, "masked model does not match the joint model");
  }
}

std::string serialize(const ModelBundle& bundle) {
  bundle.validate();
  json masked = json::array();
  for (const auto& m : bundle.masked) masked.push_back(masked_to_json(m));
  json doc = {{"schema_version", kModelSchemaVersion},
              {"kind", "model_bundle"},
              {"name", bundle.name},
              {"joint", joint_to_json(bundle.joint)},
              {"conditionals", conditionals_to_json(bundle.conditionals)},
              {"masked", masked}};
  return doc.dump(1);
}

ModelBundle parse_model_bundle(std::string_view text) {
  const json doc = detail::parse_json(text, "model bundle");
  return detail::guarded("model bundle", [&] {
    require(doc.at("schema_version").get<int>() == kModelSchemaVersion, ErrorCode::parse,
            "unsupported model schema version");
    ModelBundle b;
    b.name = doc.value("name", "");
    b.joint = joint_from(doc.at("joint"));
    b.conditionals = conditionals_from(doc.at("conditionals"));
    for (const auto& m : doc.at("masked")) b.masked.push_back(masked_from(m));
    b.validate();
    return b;
  });
}

std::string serialize(const JointModel& model) {
  model.validate();
  json doc = joint_to_json(model);
  doc["schema_version"] = kModelSchemaVersion;
  doc["kind"] = "joint_model";
  return doc.dump(1);
}

JointModel parse_joint_model(std::string_view text) {
  const json doc = detail::parse_json(text, "joint model");
  return detail::guarded("joint model", [&] { return joint_from(doc); });
}

void save_model_bundle(const ModelBundle& bundle, const std::filesystem::path& path) {
  detail::write_text_file(path, serialize(bundle) + "\n");
}

ModelBundle load_model_bundle(const std::filesystem::path& path) {
  return parse_model_bundle(detail::read_text_file(path));
}

}  // namespace hfq
