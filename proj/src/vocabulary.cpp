#include "lsa/vocabulary.hpp"

#include <stdexcept>

namespace lsa {

std::string_view to_string(RelationKind kind) {
  switch (kind) {
    case RelationKind::attention: return "attention";
    case RelationKind::spatial: return "spatial";
    case RelationKind::contact: return "contact";
  }
  return "?";
}

Vocabulary::Vocabulary(std::vector<std::string> objects,
                       std::vector<std::string> attention,
                       std::vector<std::string> spatial,
                       std::vector<std::string> contact)
    : objects_(std::move(objects)),
      attention_(std::move(attention)),
      spatial_(std::move(spatial)),
      contact_(std::move(contact)) {
  for (std::size_t i = 0; i < objects_.size(); ++i) {
    if (!object_index_.emplace(objects_[i], static_cast<int>(i)).second) {
      throw std::invalid_argument("duplicate object class: " + objects_[i]);
    }
  }
  auto add = [this](const std::vector<std::string>& names, RelationKind kind) {
    for (const auto& name : names) {
      if (!relation_kind_.emplace(name, kind).second) {
        throw std::invalid_argument("relation name appears in two partitions: " + name);
      }
    }
  };
  add(attention_, RelationKind::attention);
  add(spatial_, RelationKind::spatial);
  add(contact_, RelationKind::contact);
}

const Vocabulary& Vocabulary::action_genome() {
  static const Vocabulary vocab{
      {"person", "bag", "bed", "blanket", "book", "box", "broom", "chair",
       "closet/cabinet", "clothes", "cup/glass/bottle", "dish", "door",
       "doorknob", "doorway", "floor", "food", "groceries", "laptop", "light",
       "medicine", "mirror", "paper/notebook", "phone/camera", "picture",
       "pillow", "refrigerator", "sandwich", "shelf", "shoe", "sofa/couch",
       "table", "television", "towel", "vacuum", "window"},
      {"looking_at", "not_looking_at", "unsure"},
      {"above", "beneath", "in_front_of", "behind", "on_the_side_of", "in"},
      {"carrying", "covered_by", "drinking_from", "eating",
       "have_it_on_the_back", "holding", "leaning_on", "lying_on",
       "not_contacting", "other_relationship", "sitting_on", "standing_on",
       "touching", "twisting", "wearing", "wiping", "writing_on"}};
  return vocab;
}

const std::vector<std::string>& Vocabulary::relations(RelationKind kind) const {
  switch (kind) {
    case RelationKind::attention: return attention_;
    case RelationKind::spatial: return spatial_;
    case RelationKind::contact: return contact_;
  }
  return attention_;
}

bool Vocabulary::has_object(std::string_view name) const {
  return object_index_.find(std::string(name)) != object_index_.end();
}

bool Vocabulary::has_relation(std::string_view name) const {
  return relation_kind_.find(std::string(name)) != relation_kind_.end();
}

std::optional<RelationKind> Vocabulary::relation_kind(std::string_view name) const {
  auto it = relation_kind_.find(std::string(name));
  if (it == relation_kind_.end()) return std::nullopt;
  return it->second;
}

bool Vocabulary::relation_in(std::string_view name, RelationKind kind) const {
  auto k = relation_kind(name);
  return k.has_value() && *k == kind;
}

}  // namespace lsa
