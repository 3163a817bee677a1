#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "egoadl/taxonomy.hpp"

namespace egoadl {

inline constexpr int kFramesPerSegment = 60;

/// Axis-aligned pixel rectangle; construct through make() to enforce x1 < x2,
/// y1 < y2 and finiteness.
struct Box2D {
  double x1 = 0, y1 = 0, x2 = 1, y2 = 1;

  static Box2D make(double x1, double y1, double x2, double y2);
  /// Empty string when valid, otherwise the violated invariant.
  static std::string check(double x1, double y1, double x2, double y2);

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }

  friend bool operator==(const Box2D&, const Box2D&) = default;
};

struct ObjectDetection {
  std::string raw_label;
  double score = 1.0;
  Box2D box;

  friend bool operator==(const ObjectDetection&, const ObjectDetection&) = default;
};

enum class HandSide { left, right, unknown };

std::string_view to_string(HandSide side);
std::optional<HandSide> parse_hand_side(std::string_view text);

struct HoiObject {
  Box2D box;
  HandSide hand_side = HandSide::unknown;
  std::string contact_state;
  double score = 1.0;

  friend bool operator==(const HoiObject&, const HoiObject&) = default;
};

struct FrameObservation {
  int frame_index = 0;
  std::vector<ObjectDetection> objects;
  std::vector<HoiObject> hoi_objects;

  friend bool operator==(const FrameObservation&, const FrameObservation&) = default;
};

struct SegmentKey {
  std::string participant_id;
  std::string video_id;
  int segment_index = 0;

  auto operator<=>(const SegmentKey&) const = default;
  std::string to_string() const;
};

struct Segment {
  SegmentKey key;
  std::vector<FrameObservation> frames;
  std::optional<AdlLabel> label;

  const std::string& participant_id() const { return key.participant_id; }
};

struct Diagnostic {
  std::size_t line = 0;
  std::string message;
};

/// Frames grouped per segment key, ordered by key then frame_index.
using FrameGroups = std::map<SegmentKey, std::vector<FrameObservation>>;

struct ParsedRecords {
  FrameGroups groups;
  std::vector<Diagnostic> diagnostics;
  std::size_t valid_records = 0;
};

/// One frame record with its segment key, as it appears on a line.
struct FrameRecord {
  SegmentKey key;
  FrameObservation frame;
};

/// Parses one JSON frame record. Throws ValidationError describing the first
/// problem found.
FrameRecord parse_record_line(std::string_view line);
std::string serialize_record(const SegmentKey& key, const FrameObservation& frame);

/// Reads a JSON-lines stream. Malformed or invalid lines are collected as
/// diagnostics and skipped; valid records are kept. Blank lines are ignored.
/// Throws std::runtime_error if the stream itself fails.
ParsedRecords parse_records(std::istream& in);
ParsedRecords parse_records_file(const std::string& path);

/// Writes groups back out as JSON lines in canonical order.
void write_records(std::ostream& out, const FrameGroups& groups);

using LabelManifest = std::map<SegmentKey, AdlLabel>;

/// Reads `participant_id,video_id,segment_index,adl_label` CSV. Throws
/// ParseError (bad header/row, unknown ADL) or ValidationError (duplicate key),
/// each with the offending line number.
LabelManifest load_manifest(std::istream& in);
LabelManifest load_manifest_file(const std::string& path);
void write_manifest(std::ostream& out, const LabelManifest& manifest);

enum class AssembleMode { training, inference };

struct AssembleResult {
  std::vector<Segment> segments;
  /// Manifest entries that had no frames.
  std::vector<SegmentKey> labels_without_frames;
};

/// Builds Segments from grouped frames. In training mode every group needs a
/// label. Throws ValidationError on a missing label, an empty group, more
/// than 60 frames, or frame indices that are not strictly increasing.
AssembleResult assemble_segments(const FrameGroups& groups, const LabelManifest& labels, AssembleMode mode);

}  // namespace egoadl
