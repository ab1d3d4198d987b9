#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "scenegrasp/body.hpp"
#include "scenegrasp/distance.hpp"
#include "scenegrasp/voxel_grid.hpp"

namespace scenegrasp {

enum class ContactTarget { Object, Floor };

const char* target_name(ContactTarget t);

struct ContactSet {
  ContactTarget target = ContactTarget::Object;
  std::vector<std::uint32_t> ids;  ///< sorted, unique

  static ContactSet from_ids(ContactTarget target, std::vector<std::uint32_t> ids);
  std::size_t size() const { return ids.size(); }
  bool operator==(const ContactSet&) const = default;
};

inline constexpr double kContactThreshold = 0.02;  // meters

/// Body vertices strictly closer than `threshold` to the object surface
/// (unsigned distance, so interior vertices are always in contact).
ContactSet annotate_contacts(const BodyFrame& body, const MeshDistance& object,
                             double threshold = kContactThreshold);
ContactSet annotate_contacts(const BodyFrame& body, const TriMesh& object,
                             double threshold = kContactThreshold);

/// Foot and lower-leg vertices with |z| < threshold.
ContactSet floor_contacts(const BodyFrame& body, double threshold = kContactThreshold);

struct Prf1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Vertex-set precision/recall/F1. Both sets empty scores (1, 1, 1); exactly
/// one empty scores 0 for the undefined ratio and F1. Throws
/// ValidationError when the targets differ.
Prf1 prf1(const ContactSet& predicted, const ContactSet& truth);

struct MetricsReport {
  std::string sample_id;
  double scene_pen = 0.0;
  double floor_pen = 0.0;
  double object_pen_sdf = 0.0;
  std::size_t object_pen_negative = 0;
  Prf1 object_contact;
  Prf1 floor_contact;

  nlohmann::json to_json() const;
  static MetricsReport from_json(const nlohmann::json& j);
};

struct FrameAssets {
  const VoxelGrid* occupancy = nullptr;  ///< filled scene grid
  const TriMesh* object = nullptr;       ///< posed object, watertight
  std::optional<ContactSet> gt_object;   ///< defaults to annotation
  std::optional<ContactSet> gt_floor;
  double contact_threshold = kContactThreshold;
};

struct FrameOutcome {
  std::optional<MetricsReport> report;
  std::string failure;  ///< set when report is empty
  bool ok() const { return report.has_value(); }
};

/// All four metrics for one frame. Sub-operation errors are caught and
/// returned as a failed outcome, never thrown.
FrameOutcome evaluate_frame(const std::string& sample_id, const BodyFrame& body,
                            const FrameAssets& assets);

struct AggregateRow {
  std::string method;
  std::size_t count = 0;
  std::size_t failed = 0;
  MetricsReport mean;  ///< field-wise arithmetic means (sample_id unused)
};

/// Macro-average over successful reports. Throws ValidationError if none.
AggregateRow aggregate(const std::vector<MetricsReport>& reports, const std::string& method,
                       std::size_t failed = 0);

/// CSV with one header line and one line per row.
std::string render_csv(const std::vector<AggregateRow>& rows);
/// Aligned text table grouped as Penetration | Object Contact | Floor Contact.
std::string render_table(const std::vector<AggregateRow>& rows);

/// {"object": [ids], "floor": [ids]}; either key may be absent.
struct GroundTruthContacts {
  std::optional<ContactSet> object;
  std::optional<ContactSet> floor;
};
GroundTruthContacts load_gt_contacts(const std::filesystem::path& path);
void write_gt_contacts(const std::filesystem::path& path, const GroundTruthContacts& gt);

}  // namespace scenegrasp
