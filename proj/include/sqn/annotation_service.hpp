// Copyright 2026 The SQN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include "sqn/point_cloud.hpp"
#include "sqn/weak_labels.hpp"

namespace httplib {
class Server;
}

namespace sqn {

struct AnnotationOptions {
  /// Fraction of the cloud offered as annotation candidates.
  double ratio = 0.001;
  std::uint64_t seed = 0;
  /// Grid cell of the context cloud; 0 serves the full cloud.
  double reference_cell = 0.05;
  /// Where POST /commit writes the SQNL file.
  std::filesystem::path output;
  /// Defaults to "class0".."class{C-1}".
  std::vector<std::string> class_names;
  /// Used when the cloud carries no class count of its own.
  int num_classes = 0;
};

/// Outcome of a label submission.
struct SubmitResult {
  bool accepted = false;
  std::string reason;
  std::uint64_t revision = 0;
};

/// Label state behind the annotation endpoints. Candidate ids are rows of
/// the candidate cloud; the committed file refers to rows of the full cloud.
///
///   GET  /cloud/reference      SQNC, decimated context cloud (no labels)
///   GET  /cloud/candidates     SQNC, the candidate subset (no labels)
///   GET  /meta                 {"n", "c", "ratio", "class_names", "candidates"}
///   GET  /labels               {"revision", "points": [{"id", "class"}]}
///   POST /labels               {"points": [{"id", "class"}]}, all or nothing
///   POST /commit               writes the SQNL file
class AnnotationService {
 public:
  AnnotationService(PointCloud cloud, AnnotationOptions options);
  ~AnnotationService();

  AnnotationService(const AnnotationService&) = delete;
  AnnotationService& operator=(const AnnotationService&) = delete;

  int num_classes() const { return num_classes_; }
  Index num_candidates() const { return candidates_.size(); }
  /// Source row in the full cloud for each candidate id.
  const std::vector<Index>& candidate_sources() const { return candidate_sources_; }

  std::string reference_payload() const;
  std::string candidates_payload() const;
  std::string meta_json() const;
  std::string labels_json() const;

  SubmitResult submit(const std::string& body);
  /// Writes the current labels; returns the written set.
  SparseLabelSet commit();
  SparseLabelSet label_set() const;
  std::uint64_t revision() const;

  /// Registers every endpoint on `server`.
  void bind(httplib::Server& server);

  /// Blocking HTTP loop on host:port; port 0 picks a free port, reported
  /// through `on_ready` before serving.
  void serve(const std::string& host, int port, const std::function<void(int)>& on_ready = {});
  void stop();

 private:
  PointCloud cloud_;
  PointCloud reference_;
  PointCloud candidates_;
  std::vector<Index> candidate_sources_;
  AnnotationOptions options_;
  int num_classes_ = 0;

  mutable std::shared_mutex mutex_;
  std::mutex commit_mutex_;
  std::map<Index, Label> labels_;
  std::uint64_t revision_ = 0;

  std::unique_ptr<httplib::Server> server_;
};

}  // namespace sqn
