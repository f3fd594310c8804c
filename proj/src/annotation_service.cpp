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

#include "sqn/annotation_service.hpp"

#include <httplib.h>

#include <json.hpp>
#include <mutex>

#include "sqn/cloud_io.hpp"
#include "sqn/error.hpp"
#include "sqn/sampling.hpp"

namespace sqn {

using nlohmann::json;

namespace {

PointCloud strip_labels(PointCloud cloud) {
  cloud.labels.reset();
  return cloud;
}

void reply_json(httplib::Response& res, const std::string& body, int status = 200) {
  res.status = status;
  res.set_content(body, "application/json");
}

void reply_error(httplib::Response& res, const std::string& reason, int status = 400) {
  reply_json(res, json{{"error", reason}}.dump(), status);
}

}  // namespace

AnnotationService::AnnotationService(PointCloud cloud, AnnotationOptions options)
    : cloud_(std::move(cloud)), options_(std::move(options)) {
  cloud_.validate();
  num_classes_ = cloud_.num_classes > 0 ? cloud_.num_classes : options_.num_classes;
  if (num_classes_ < 1 && !options_.class_names.empty()) num_classes_ = static_cast<int>(options_.class_names.size());
  if (num_classes_ < 1) throw ArgumentError("annotation needs a class count");
  if (options_.class_names.empty()) {
    for (int c = 0; c < num_classes_; ++c) options_.class_names.push_back("class" + std::to_string(c));
  }
  if (static_cast<int>(options_.class_names.size()) != num_classes_) {
    throw ArgumentError("expected " + std::to_string(num_classes_) + " class names, got " +
                        std::to_string(options_.class_names.size()));
  }
  if (cloud_.size() == 0) throw ArgumentError("cannot annotate an empty cloud");

  auto sampled = random_downsample(cloud_, options_.ratio, options_.seed);
  candidates_ = strip_labels(std::move(sampled.sampled));
  candidate_sources_ = std::move(sampled.index_map);
  if (options_.reference_cell > 0.0) {
    reference_ = strip_labels(grid_downsample(cloud_, options_.reference_cell).sampled);
  } else {
    reference_ = strip_labels(cloud_);
  }
}

AnnotationService::~AnnotationService() = default;

std::string AnnotationService::reference_payload() const { return encode_sqnc(reference_); }

std::string AnnotationService::candidates_payload() const { return encode_sqnc(candidates_); }

std::string AnnotationService::meta_json() const {
  return json{{"n", cloud_.size()},
              {"c", num_classes_},
              {"ratio", options_.ratio},
              {"class_names", options_.class_names},
              {"candidates", candidates_.size()}}
      .dump();
}

std::string AnnotationService::labels_json() const {
  std::shared_lock lock(mutex_);
  json points = json::array();
  for (const auto& [id, cls] : labels_) points.push_back({{"id", id}, {"class", cls}});
  return json{{"revision", revision_}, {"points", points}}.dump();
}

SubmitResult AnnotationService::submit(const std::string& body) {
  SubmitResult result;
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error& e) {
    result.reason = std::string("body is not valid JSON: ") + e.what();
    return result;
  }
  if (!doc.is_object() || !doc.contains("points") || !doc["points"].is_array()) {
    result.reason = "expected {\"points\": [...]}";
    return result;
  }
  // Validate everything before touching the state.
  std::vector<std::pair<Index, Label>> updates;
  std::size_t item = 0;
  for (const auto& p : doc["points"]) {
    const std::string where = "points[" + std::to_string(item++) + "]: ";
    if (!p.is_object() || !p.contains("id") || !p.contains("class")) {
      result.reason = where + "expected {\"id\", \"class\"}";
      return result;
    }
    const auto& id = p["id"];
    const auto& cls = p["class"];
    if (!id.is_number_integer() || !cls.is_number_integer()) {
      result.reason = where + "id and class must be integers";
      return result;
    }
    const auto id_value = id.get<std::int64_t>();
    const auto cls_value = cls.get<std::int64_t>();
    if (id_value < 0 || id_value >= candidates_.size()) {
      result.reason = where + "id " + std::to_string(id_value) + " is not a candidate (0.." +
                      std::to_string(candidates_.size() - 1) + ")";
      return result;
    }
    if (cls_value < 0 || cls_value >= num_classes_) {
      result.reason = where + "class " + std::to_string(cls_value) + " outside [0, " +
                      std::to_string(num_classes_) + ")";
      return result;
    }
    updates.emplace_back(static_cast<Index>(id_value), static_cast<Label>(cls_value));
  }
  std::unique_lock lock(mutex_);
  for (const auto& [id, cls] : updates) labels_[id] = cls;
  result.accepted = true;
  result.revision = ++revision_;
  return result;
}

SparseLabelSet AnnotationService::label_set() const {
  std::shared_lock lock(mutex_);
  std::map<Index, Label> by_source;
  for (const auto& [id, cls] : labels_) by_source[candidate_sources_[static_cast<std::size_t>(id)]] = cls;
  SparseLabelSet set;
  set.num_points = cloud_.size();
  set.num_classes = num_classes_;
  set.seed = options_.seed;
  for (const auto& [index, cls] : by_source) {
    set.indices.push_back(index);
    set.labels.push_back(cls);
  }
  set.ratio = static_cast<double>(set.indices.size()) / static_cast<double>(cloud_.size());
  return set;
}

std::uint64_t AnnotationService::revision() const {
  std::shared_lock lock(mutex_);
  return revision_;
}

SparseLabelSet AnnotationService::commit() {
  if (options_.output.empty()) throw ArgumentError("no output path configured for commit");
  // One writer at a time; submissions may still land after the snapshot.
  std::unique_lock commit_lock(commit_mutex_);
  auto set = label_set();
  export_label_file(set, options_.output);
  return set;
}

void AnnotationService::bind(httplib::Server& server) {
  server.Get("/cloud/reference", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(reference_payload(), "application/octet-stream");
  });
  server.Get("/cloud/candidates", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(candidates_payload(), "application/octet-stream");
  });
  server.Get("/meta", [this](const httplib::Request&, httplib::Response& res) { reply_json(res, meta_json()); });
  server.Get("/labels", [this](const httplib::Request&, httplib::Response& res) { reply_json(res, labels_json()); });
  server.Post("/labels", [this](const httplib::Request& req, httplib::Response& res) {
    const auto result = submit(req.body);
    if (!result.accepted) {
      reply_error(res, result.reason);
      return;
    }
    reply_json(res, json{{"revision", result.revision}}.dump());
  });
  server.Post("/commit", [this](const httplib::Request&, httplib::Response& res) {
    try {
      const auto set = commit();
      reply_json(res, json{{"path", options_.output.string()}, {"count", set.size()}, {"revision", revision()}}.dump());
    } catch (const std::exception& e) {
      reply_error(res, e.what(), 500);
    }
  });
}

void AnnotationService::serve(const std::string& host, int port, const std::function<void(int)>& on_ready) {
  server_ = std::make_unique<httplib::Server>();
  bind(*server_);
  int bound = port;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
  } else if (!server_->bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  if (on_ready) on_ready(bound);
  server_->listen_after_bind();
}

void AnnotationService::stop() {
  if (server_) server_->stop();
}

}  // namespace sqn
