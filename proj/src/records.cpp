#include "egoadl/records.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "egoadl/error.hpp"

namespace egoadl {

using ojson = nlohmann::ordered_json;

std::string Box2D::check(double x1, double y1, double x2, double y2) {
  if (!std::isfinite(x1) || !std::isfinite(y1) || !std::isfinite(x2) || !std::isfinite(y2)) {
    return "box coordinates must be finite";
  }
  if (!(x1 < x2)) return "box violates x1 < x2";
  if (!(y1 < y2)) return "box violates y1 < y2";
  return {};
}

Box2D Box2D::make(double x1, double y1, double x2, double y2) {
  if (auto err = check(x1, y1, x2, y2); !err.empty()) throw ValidationError(err);
  return Box2D{x1, y1, x2, y2};
}

std::string_view to_string(HandSide side) {
  switch (side) {
    case HandSide::left: return "left";
    case HandSide::right: return "right";
    case HandSide::unknown: return "unknown";
  }
  return "unknown";
}

std::optional<HandSide> parse_hand_side(std::string_view text) {
  if (text == "left") return HandSide::left;
  if (text == "right") return HandSide::right;
  if (text == "unknown") return HandSide::unknown;
  return std::nullopt;
}

std::string SegmentKey::to_string() const {
  return participant_id + "/" + video_id + "/" + std::to_string(segment_index);
}

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw ValidationError(msg); }

const ojson& field(const ojson& obj, const char* name, const std::string& where) {
  auto it = obj.find(name);
  if (it == obj.end()) invalid(where + "missing field '" + name + "'");
  return *it;
}

std::string get_string(const ojson& obj, const char* name, const std::string& where) {
  const auto& v = field(obj, name, where);
  if (!v.is_string()) invalid(where + "field '" + name + "' must be a string");
  return v.get<std::string>();
}

long long get_int(const ojson& obj, const char* name, const std::string& where) {
  const auto& v = field(obj, name, where);
  if (!v.is_number_integer()) invalid(where + "field '" + name + "' must be an integer");
  return v.get<long long>();
}

double get_score(const ojson& obj, const std::string& where) {
  const auto& v = field(obj, "score", where);
  if (!v.is_number()) invalid(where + "field 'score' must be a number");
  double s = v.get<double>();
  if (!(s >= 0.0 && s <= 1.0)) invalid(where + "score must be in [0, 1]");
  return s;
}

Box2D get_box(const ojson& obj, const std::string& where) {
  const auto& v = field(obj, "box", where);
  if (!v.is_array() || v.size() != 4) invalid(where + "box must be an array [x1, y1, x2, y2]");
  double c[4];
  for (std::size_t i = 0; i < 4; ++i) {
    if (!v[i].is_number()) invalid(where + "box coordinates must be numbers");
    c[i] = v[i].get<double>();
  }
  if (auto err = Box2D::check(c[0], c[1], c[2], c[3]); !err.empty()) invalid(where + err);
  return Box2D{c[0], c[1], c[2], c[3]};
}

ojson box_json(const Box2D& b) { return ojson::array({b.x1, b.y1, b.x2, b.y2}); }

std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) throw ParseError("manifest line " + std::to_string(line_no) + ": unterminated quote");
  out.push_back(std::move(cur));
  return out;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

FrameRecord parse_record_line(std::string_view line) {
  ojson doc;
  try {
    doc = ojson::parse(line);
  } catch (const ojson::parse_error& e) {
    throw ValidationError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) invalid("record must be a JSON object");

  FrameRecord rec;
  rec.key.participant_id = get_string(doc, "participant_id", "");
  if (rec.key.participant_id.empty()) invalid("participant_id must be non-empty");
  rec.key.video_id = get_string(doc, "video_id", "");
  long long seg = get_int(doc, "segment_index", "");
  if (seg < 0 || seg > INT32_MAX) invalid("segment_index must be a non-negative int");
  rec.key.segment_index = static_cast<int>(seg);
  long long frame = get_int(doc, "frame_index", "");
  if (frame < 0 || frame >= kFramesPerSegment) invalid("frame_index must be in [0, 60)");
  rec.frame.frame_index = static_cast<int>(frame);

  const auto& objects = field(doc, "objects", "");
  if (!objects.is_array()) invalid("field 'objects' must be an array");
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const std::string where = "objects[" + std::to_string(i) + "]: ";
    const auto& o = objects[i];
    if (!o.is_object()) invalid(where + "must be an object");
    ObjectDetection det;
    det.raw_label = get_string(o, "label", where);
    if (det.raw_label.empty()) invalid(where + "label must be non-empty");
    det.score = get_score(o, where);
    det.box = get_box(o, where);
    rec.frame.objects.push_back(std::move(det));
  }

  const auto& hois = field(doc, "hoi_objects", "");
  if (!hois.is_array()) invalid("field 'hoi_objects' must be an array");
  for (std::size_t i = 0; i < hois.size(); ++i) {
    const std::string where = "hoi_objects[" + std::to_string(i) + "]: ";
    const auto& o = hois[i];
    if (!o.is_object()) invalid(where + "must be an object");
    HoiObject hoi;
    hoi.box = get_box(o, where);
    auto side = parse_hand_side(get_string(o, "hand_side", where));
    if (!side) invalid(where + "hand_side must be left, right or unknown");
    hoi.hand_side = *side;
    hoi.contact_state = get_string(o, "contact_state", where);
    hoi.score = get_score(o, where);
    rec.frame.hoi_objects.push_back(std::move(hoi));
  }
  return rec;
}

std::string serialize_record(const SegmentKey& key, const FrameObservation& frame) {
  ojson doc;
  doc["participant_id"] = key.participant_id;
  doc["video_id"] = key.video_id;
  doc["segment_index"] = key.segment_index;
  doc["frame_index"] = frame.frame_index;
  ojson objects = ojson::array();
  for (const auto& o : frame.objects) {
    ojson j;
    j["label"] = o.raw_label;
    j["score"] = o.score;
    j["box"] = box_json(o.box);
    objects.push_back(std::move(j));
  }
  doc["objects"] = std::move(objects);
  ojson hois = ojson::array();
  for (const auto& h : frame.hoi_objects) {
    ojson j;
    j["box"] = box_json(h.box);
    j["hand_side"] = std::string(to_string(h.hand_side));
    j["contact_state"] = h.contact_state;
    j["score"] = h.score;
    hois.push_back(std::move(j));
  }
  doc["hoi_objects"] = std::move(hois);
  return doc.dump();
}

ParsedRecords parse_records(std::istream& in) {
  if (!in) throw std::runtime_error("record stream is not readable");
  ParsedRecords out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      FrameRecord rec = parse_record_line(line);
      out.groups[rec.key].push_back(std::move(rec.frame));
      ++out.valid_records;
    } catch (const ValidationError& e) {
      out.diagnostics.push_back({line_no, e.what()});
    }
  }
  if (in.bad()) throw std::runtime_error("I/O error while reading record stream");
  for (auto& [key, frames] : out.groups) {
    std::stable_sort(frames.begin(), frames.end(),
                     [](const auto& a, const auto& b) { return a.frame_index < b.frame_index; });
  }
  return out;
}

ParsedRecords parse_records_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open records file '" + path + "'");
  return parse_records(in);
}

void write_records(std::ostream& out, const FrameGroups& groups) {
  for (const auto& [key, frames] : groups) {
    for (const auto& f : frames) out << serialize_record(key, f) << '\n';
  }
}

LabelManifest load_manifest(std::istream& in) {
  if (!in) throw std::runtime_error("manifest stream is not readable");
  LabelManifest out;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cols = split_csv_line(line, line_no);
    if (!header_seen) {
      if (cols != std::vector<std::string>{"participant_id", "video_id", "segment_index", "adl_label"}) {
        throw ParseError("manifest line " + std::to_string(line_no) +
                         ": expected header 'participant_id,video_id,segment_index,adl_label'");
      }
      header_seen = true;
      continue;
    }
    const std::string where = "manifest line " + std::to_string(line_no) + ": ";
    if (cols.size() != 4) throw ParseError(where + "expected 4 columns, got " + std::to_string(cols.size()));
    SegmentKey key{cols[0], cols[1], 0};
    if (key.participant_id.empty()) throw ParseError(where + "empty participant_id");
    try {
      std::size_t used = 0;
      long v = std::stol(cols[2], &used);
      if (used != cols[2].size() || v < 0 || v > INT32_MAX) throw std::invalid_argument("range");
      key.segment_index = static_cast<int>(v);
    } catch (const std::exception&) {
      throw ParseError(where + "segment_index '" + cols[2] + "' is not a non-negative integer");
    }
    auto label = find_adl(cols[3]);
    if (!label) throw ParseError(where + "unknown ADL '" + cols[3] + "'");
    if (!out.emplace(key, *label).second) {
      throw ValidationError(where + "duplicate segment key " + key.to_string());
    }
  }
  if (in.bad()) throw std::runtime_error("I/O error while reading manifest");
  if (!header_seen) throw ParseError("manifest: missing header row");
  return out;
}

LabelManifest load_manifest_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest file '" + path + "'");
  return load_manifest(in);
}

void write_manifest(std::ostream& out, const LabelManifest& manifest) {
  out << "participant_id,video_id,segment_index,adl_label\n";
  for (const auto& [key, label] : manifest) {
    out << csv_field(key.participant_id) << ',' << csv_field(key.video_id) << ',' << key.segment_index << ','
        << csv_field(label.name) << '\n';
  }
}

AssembleResult assemble_segments(const FrameGroups& groups, const LabelManifest& labels, AssembleMode mode) {
  AssembleResult out;
  out.segments.reserve(groups.size());
  for (const auto& [key, frames] : groups) {
    const std::string where = "segment " + key.to_string() + ": ";
    if (frames.empty()) throw ValidationError(where + "no valid frames");
    if (frames.size() > static_cast<std::size_t>(kFramesPerSegment)) {
      throw ValidationError(where + "more than 60 frames");
    }
    for (std::size_t i = 1; i < frames.size(); ++i) {
      if (frames[i].frame_index <= frames[i - 1].frame_index) {
        throw ValidationError(where + "frame_index strictly increasing violated at frame_index " +
                              std::to_string(frames[i].frame_index));
      }
    }
    Segment seg{key, frames, std::nullopt};
    if (auto it = labels.find(key); it != labels.end()) {
      seg.label = it->second;
    } else if (mode == AssembleMode::training) {
      throw ValidationError(where + "missing label in manifest (training mode)");
    }
    out.segments.push_back(std::move(seg));
  }
  for (const auto& [key, label] : labels) {
    if (!groups.contains(key)) out.labels_without_frames.push_back(key);
  }
  return out;
}

}  // namespace egoadl
