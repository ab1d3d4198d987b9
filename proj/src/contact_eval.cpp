#include "scenegrasp/contact_eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <sstream>

#include "scenegrasp/errors.hpp"
#include "scenegrasp/io_util.hpp"
#include "scenegrasp/kernels.hpp"
#include "scenegrasp/penetration.hpp"

namespace scenegrasp {

const char* target_name(ContactTarget t) { return t == ContactTarget::Object ? "object" : "floor"; }

ContactSet ContactSet::from_ids(ContactTarget target, std::vector<std::uint32_t> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return {target, std::move(ids)};
}

ContactSet annotate_contacts(const BodyFrame& body, const MeshDistance& object, double threshold) {
  if (body.vertices.empty()) throw ValidationError("contact annotation of an empty body");
  if (!(threshold > 0)) throw ConfigError("contact threshold must be positive");
  const auto dist = kernels::parallel::unsigned_distances(object, body.vertices);
  ContactSet out{ContactTarget::Object, {}};
  for (std::size_t v = 0; v < dist.size(); ++v)
    if (dist[v] < threshold) out.ids.push_back(static_cast<std::uint32_t>(v));
  return out;
}

ContactSet annotate_contacts(const BodyFrame& body, const TriMesh& object, double threshold) {
  return annotate_contacts(body, MeshDistance(object), threshold);
}

ContactSet floor_contacts(const BodyFrame& body, double threshold) {
  if (!(threshold > 0)) throw ConfigError("contact threshold must be positive");
  const auto legs = body.ids_of({BodyPart::Foot, BodyPart::LowerLeg});
  if (legs.empty()) throw ValidationError("floor contacts need foot or lower-leg vertices");
  ContactSet out{ContactTarget::Floor, {}};
  for (auto v : legs)
    if (std::abs(body.vertices[v].z()) < threshold) out.ids.push_back(v);
  return out;
}

Prf1 prf1(const ContactSet& pred, const ContactSet& truth) {
  if (pred.target != truth.target)
    throw ValidationError("contact sets compare different targets");
  if (pred.ids.empty() && truth.ids.empty()) return {1.0, 1.0, 1.0};
  std::vector<std::uint32_t> both;
  std::set_intersection(pred.ids.begin(), pred.ids.end(), truth.ids.begin(), truth.ids.end(),
                        std::back_inserter(both));
  const double tp = static_cast<double>(both.size());
  Prf1 r;
  r.precision = pred.ids.empty() ? 0.0 : tp / static_cast<double>(pred.ids.size());
  r.recall = truth.ids.empty() ? 0.0 : tp / static_cast<double>(truth.ids.size());
  const double s = r.precision + r.recall;
  r.f1 = s > 0 ? 2.0 * r.precision * r.recall / s : 0.0;
  return r;
}

namespace {
nlohmann::json prf_json(const Prf1& p) {
  return {{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1}};
}
Prf1 prf_from(const nlohmann::json& j) {
  return {j.at("precision").get<double>(), j.at("recall").get<double>(), j.at("f1").get<double>()};
}
}  // namespace

nlohmann::json MetricsReport::to_json() const {
  return {{"sample_id", sample_id},
          {"scene_pen", scene_pen},
          {"floor_pen", floor_pen},
          {"object_pen_sdf", object_pen_sdf},
          {"object_pen_negative", object_pen_negative},
          {"object_contact", prf_json(object_contact)},
          {"floor_contact", prf_json(floor_contact)}};
}

MetricsReport MetricsReport::from_json(const nlohmann::json& j) {
  MetricsReport r;
  r.sample_id = j.value("sample_id", std::string());
  r.scene_pen = j.at("scene_pen").get<double>();
  r.floor_pen = j.at("floor_pen").get<double>();
  r.object_pen_sdf = j.at("object_pen_sdf").get<double>();
  r.object_pen_negative = j.value("object_pen_negative", std::size_t{0});
  r.object_contact = prf_from(j.at("object_contact"));
  r.floor_contact = prf_from(j.at("floor_contact"));
  return r;
}

FrameOutcome evaluate_frame(const std::string& sample_id, const BodyFrame& body,
                            const FrameAssets& assets) {
  FrameOutcome out;
  try {
    if (!assets.occupancy || !assets.object) throw ValidationError("frame assets incomplete");
    body.validate();
    for (const auto* gt : {&assets.gt_object, &assets.gt_floor})
      if (*gt && !(*gt)->ids.empty() && (*gt)->ids.back() >= body.size())
        throw ValidationError("ground-truth contact id out of range for this body");
    MetricsReport r;
    r.sample_id = sample_id;
    r.scene_pen = scene_penetration(body, *assets.occupancy);
    r.floor_pen = floor_penetration(body);
    const MeshDistance object(*assets.object);
    const auto op = object_penetration(body, *assets.object);
    r.object_pen_sdf = op.mean_sdf;
    r.object_pen_negative = op.negative_count;
    const ContactSet pred_obj = annotate_contacts(body, object, assets.contact_threshold);
    const ContactSet pred_floor = floor_contacts(body, assets.contact_threshold);
    r.object_contact = prf1(pred_obj, assets.gt_object.value_or(pred_obj));
    r.floor_contact = prf1(pred_floor, assets.gt_floor.value_or(pred_floor));
    out.report = r;
  } catch (const std::exception& e) {
    out.failure = e.what();
  }
  return out;
}

AggregateRow aggregate(const std::vector<MetricsReport>& reports, const std::string& method,
                       std::size_t failed) {
  if (reports.empty()) throw ValidationError("aggregate needs at least one successful report");
  AggregateRow row;
  row.method = method;
  row.count = reports.size();
  row.failed = failed;
  MetricsReport& m = row.mean;
  double neg = 0;
  for (const auto& r : reports) {
    m.scene_pen += r.scene_pen;
    m.floor_pen += r.floor_pen;
    m.object_pen_sdf += r.object_pen_sdf;
    neg += static_cast<double>(r.object_pen_negative);
    m.object_contact.precision += r.object_contact.precision;
    m.object_contact.recall += r.object_contact.recall;
    m.object_contact.f1 += r.object_contact.f1;
    m.floor_contact.precision += r.floor_contact.precision;
    m.floor_contact.recall += r.floor_contact.recall;
    m.floor_contact.f1 += r.floor_contact.f1;
  }
  const double n = static_cast<double>(reports.size());
  m.scene_pen /= n;
  m.floor_pen /= n;
  m.object_pen_sdf /= n;
  m.object_pen_negative = static_cast<std::size_t>(std::llround(neg / n));
  for (Prf1* p : {&m.object_contact, &m.floor_contact}) {
    p->precision /= n;
    p->recall /= n;
    p->f1 /= n;
  }
  return row;
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string pct(double ratio) { return fixed(100.0 * ratio, 2) + "%"; }

}  // namespace

std::string render_csv(const std::vector<AggregateRow>& rows) {
  std::ostringstream out;
  out << "method,count,failed,scene_pen,object_pen_sdf_m,floor_pen,"
         "object_precision,object_recall,object_f1,floor_precision,floor_recall,floor_f1\n";
  for (const auto& r : rows) {
    const auto& m = r.mean;
    out << r.method << ',' << r.count << ',' << r.failed << ',' << fixed(m.scene_pen, 6) << ','
        << fixed(m.object_pen_sdf, 6) << ',' << fixed(m.floor_pen, 6) << ','
        << fixed(m.object_contact.precision, 4) << ',' << fixed(m.object_contact.recall, 4) << ','
        << fixed(m.object_contact.f1, 4) << ',' << fixed(m.floor_contact.precision, 4) << ','
        << fixed(m.floor_contact.recall, 4) << ',' << fixed(m.floor_contact.f1, 4) << '\n';
  }
  return out.str();
}

std::string render_table(const std::vector<AggregateRow>& rows) {
  // Column widths: method, then 3 penetration, 3 object contact, 3 floor contact.
  std::size_t mw = 6;
  for (const auto& r : rows) mw = std::max(mw, r.method.size());
  constexpr int cw = 10;
  auto pad = [](const std::string& s, std::size_t w) {
    return s.size() >= w ? s : std::string(w - s.size(), ' ') + s;
  };
  auto center = [](const std::string& s, std::size_t w) {
    if (s.size() >= w) return s;
    const std::size_t left = (w - s.size()) / 2;
    return std::string(left, ' ') + s + std::string(w - s.size() - left, ' ');
  };
  const std::size_t group = 3 * cw;
  std::ostringstream out;
  out << std::string(mw, ' ') << " |" << center("Penetration", group) << " |"
      << center("Object Contact", group) << " |" << center("Floor Contact", group) << '\n';
  out << pad("Method", mw) << " |" << pad("Scene", cw) << pad("Object(m)", cw) << pad("Floor", cw)
      << " |" << pad("Precision", cw) << pad("Recall", cw) << pad("F1", cw) << " |"
      << pad("Precision", cw) << pad("Recall", cw) << pad("F1", cw) << '\n';
  out << std::string(mw, '-') << "-+" << std::string(group, '-') << "-+" << std::string(group, '-')
      << "-+" << std::string(group, '-') << '\n';
  for (const auto& r : rows) {
    const auto& m = r.mean;
    out << pad(r.method, mw) << " |" << pad(pct(m.scene_pen), cw)
        << pad(fixed(m.object_pen_sdf, 4), cw) << pad(pct(m.floor_pen), cw) << " |"
        << pad(fixed(m.object_contact.precision, 2), cw) << pad(fixed(m.object_contact.recall, 2), cw)
        << pad(fixed(m.object_contact.f1, 2), cw) << " |"
        << pad(fixed(m.floor_contact.precision, 2), cw) << pad(fixed(m.floor_contact.recall, 2), cw)
        << pad(fixed(m.floor_contact.f1, 2), cw) << '\n';
  }
  return out.str();
}

GroundTruthContacts load_gt_contacts(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("contact file: ") + e.what(), e.byte);
  }
  auto ids = [&](const char* key) {
    const auto& arr = j.at(key);
    if (!arr.is_array()) throw FormatError(std::string("contact file: \"") + key + "\" must be an array", 0);
    std::vector<std::uint32_t> out;
    for (const auto& v : arr) {
      if (!v.is_number_unsigned())
        throw FormatError(std::string("contact file: \"") + key + "\" ids must be non-negative integers", 0);
      out.push_back(v.get<std::uint32_t>());
    }
    return out;
  };
  if (!j.is_object()) throw FormatError("contact file must hold a JSON object", 0);
  GroundTruthContacts gt;
  if (j.contains("object")) gt.object = ContactSet::from_ids(ContactTarget::Object, ids("object"));
  if (j.contains("floor")) gt.floor = ContactSet::from_ids(ContactTarget::Floor, ids("floor"));
  return gt;
}

void write_gt_contacts(const std::filesystem::path& path, const GroundTruthContacts& gt) {
  nlohmann::json j = nlohmann::json::object();
  if (gt.object) j["object"] = gt.object->ids;
  if (gt.floor) j["floor"] = gt.floor->ids;
  write_atomically(path, j.dump() + "\n");
}

}  // namespace scenegrasp
