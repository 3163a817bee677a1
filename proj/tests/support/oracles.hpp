#pragma once

// Test-only reference implementations. Each one computes its quantity by the
// most literal route available so it shares no code path with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "egoadl/evaluation.hpp"
#include "egoadl/features.hpp"
#include "egoadl/records.hpp"
#include "egoadl/synthgen.hpp"

namespace oracle {

/// Per-class precision/recall/F1 by explicit pair counting, weighted by
/// support over the classes that occur in `truth`.
inline double weighted_f1(std::span<const int> truth, std::span<const int> pred, int k) {
  const double n = static_cast<double>(truth.size());
  double total = 0.0;
  for (int c = 0; c < k; ++c) {
    double tp = 0, fp = 0, fn = 0, support = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const bool t = truth[i] == c, p = pred[i] == c;
      if (t) support += 1;
      if (t && p) tp += 1;
      if (!t && p) fp += 1;
      if (t && !p) fn += 1;
    }
    if (support == 0) continue;
    const double precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    const double f1 = precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
    total += f1 * support / n;
  }
  return total;
}

/// IoU of integer boxes by counting unit pixels [x1, x2) x [y1, y2).
inline double raster_iou(const egoadl::Box2D& a, const egoadl::Box2D& b, int canvas) {
  long inter = 0, uni = 0;
  for (int y = 0; y < canvas; ++y) {
    for (int x = 0; x < canvas; ++x) {
      const bool in_a = x >= a.x1 && x < a.x2 && y >= a.y1 && y < a.y2;
      const bool in_b = x >= b.x1 && x < b.x2 && y >= b.y1 && y < b.y2;
      inter += in_a && in_b;
      uni += in_a || in_b;
    }
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

/// Central differences of f at p with step h.
inline std::vector<double> numeric_gradient(const std::function<double(std::span<const double>)>& f,
                                            std::vector<double> p, double h) {
  std::vector<double> g(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double keep = p[i];
    p[i] = keep + h;
    const double up = f(p);
    p[i] = keep - h;
    const double down = f(p);
    p[i] = keep;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

/// Largest |a - n| / max(|a|, |n|, floor) over coordinates.
inline double max_relative_error(std::span<const double> analytic, std::span<const double> numeric,
                                 double floor = 1e-6) {
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double scale = std::max({std::abs(analytic[i]), std::abs(numeric[i]), floor});
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / scale);
  }
  return worst;
}

/// LOSO mean weighted F1 of a nearest-class-centroid classifier.
inline double nearest_centroid_loso(const std::vector<egoadl::Segment>& segments,
                                    const std::vector<std::vector<double>>& features) {
  std::map<std::string, std::vector<std::size_t>> by_participant;
  for (std::size_t i = 0; i < segments.size(); ++i) by_participant[segments[i].key.participant_id].push_back(i);
  const std::size_t d = features.front().size();
  double sum = 0.0;
  for (const auto& [pid, test] : by_participant) {
    std::vector<std::vector<double>> centroid(egoadl::kNumAdl, std::vector<double>(d, 0.0));
    std::vector<double> n(egoadl::kNumAdl, 0.0);
    for (std::size_t i = 0; i < segments.size(); ++i) {
      if (segments[i].key.participant_id == pid) continue;
      const int c = segments[i].label->id;
      n[c] += 1;
      for (std::size_t j = 0; j < d; ++j) centroid[c][j] += features[i][j];
    }
    std::vector<int> truth, pred;
    for (std::size_t i : test) {
      int best = -1;
      double best_dist = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < egoadl::kNumAdl; ++c) {
        if (n[c] == 0) continue;
        double dist = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          const double diff = features[i][j] - centroid[c][j] / n[c];
          dist += diff * diff;
        }
        if (dist < best_dist) best_dist = dist, best = static_cast<int>(c);
      }
      truth.push_back(segments[i].label->id);
      pred.push_back(best);
    }
    sum += weighted_f1(truth, pred, egoadl::kNumAdl);
  }
  return sum / static_cast<double>(by_participant.size());
}

}  // namespace oracle

namespace fixture {

inline std::vector<egoadl::Segment> segments(const egoadl::FrameGroups& groups, const egoadl::LabelManifest& labels) {
  return egoadl::assemble_segments(groups, labels, egoadl::AssembleMode::training).segments;
}

/// Small clean corpus for fast tests.
inline egoadl::GenSpec small_spec(std::uint64_t seed = 7, int participants = 4, int segments = 21) {
  egoadl::GenSpec spec;
  spec.seed = seed;
  spec.participants = participants;
  spec.segments_per_participant = segments;
  spec.adl_mix.fill(1.0);
  return spec;
}

}  // namespace fixture
