#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lsa {

// The three disjoint predicate partitions.
enum class RelationKind { attention, spatial, contact };

std::string_view to_string(RelationKind kind);

// Closed object / relation vocabulary. Lookup is exact, case-sensitive and
// underscore-preserving ("cup/glass/bottle", "not_looking_at").
class Vocabulary {
public:
  Vocabulary(std::vector<std::string> objects,
             std::vector<std::string> attention,
             std::vector<std::string> spatial,
             std::vector<std::string> contact);

  // The Action Genome vocabulary used throughout the toolkit: 36 object
  // names ("person".."window", "__background__" excluded) and 3+6+17
  // relation names. The dataset is usually described as 35 object and 25
  // relationship classes, which does not match the annotation lists; stats
  // reports surface both counts rather than resolving the difference.
  static const Vocabulary& action_genome();

  const std::vector<std::string>& objects() const { return objects_; }
  const std::vector<std::string>& relations(RelationKind kind) const;
  const std::vector<std::string>& attention_relations() const { return attention_; }
  const std::vector<std::string>& spatial_relations() const { return spatial_; }
  const std::vector<std::string>& contact_relations() const { return contact_; }

  bool has_object(std::string_view name) const;
  bool has_relation(std::string_view name) const;
  // Partition of a relation name, or nullopt for unknown names.
  std::optional<RelationKind> relation_kind(std::string_view name) const;
  bool relation_in(std::string_view name, RelationKind kind) const;

  std::size_t object_count() const { return objects_.size(); }
  std::size_t relation_count() const {
    return attention_.size() + spatial_.size() + contact_.size();
  }

private:
  std::vector<std::string> objects_;
  std::vector<std::string> attention_;
  std::vector<std::string> spatial_;
  std::vector<std::string> contact_;
  std::unordered_map<std::string, int> object_index_;
  std::unordered_map<std::string, RelationKind> relation_kind_;
};

}  // namespace lsa
