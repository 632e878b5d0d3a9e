#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "retrace/citation_harvest.hpp"
#include "retrace/corpus_ingest.hpp"

namespace retrace::affinity {

using ingest::SubjectTag;

// Subject labels counted as humanities, compared on ingest::subject_key().
// "history - europe" matches an entry "history" through its part before " - ".
class HumanitiesTagSet {
 public:
  HumanitiesTagSet() = default;
  explicit HumanitiesTagSet(std::set<std::string> keys);

  static HumanitiesTagSet defaults();
  // Plain text, one label per line, '#' comments.
  static HumanitiesTagSet from_file(const std::filesystem::path& path);

  bool contains(const SubjectTag& tag) const;
  const std::set<std::string>& keys() const { return keys_; }

 private:
  std::set<std::string> keys_;
};

struct AffinityInputs {
  std::vector<SubjectTag> retraction_db_subjects;
  std::vector<SubjectTag> venue_subjects;
  bool title_is_clearly_humanities = false;
  int abstract_judgment = 0;  // -1, 0 or 1
};

struct AffinityScore {
  int base = 1;
  int venue_bonus = 0;
  int all_subjects_bonus = 0;
  int title_bonus = 0;
  int abstract_adjustment = 0;
  int total = 1;

  bool operator==(const AffinityScore&) const = default;
};

AffinityScore score_affinity(const AffinityInputs& inputs, const HumanitiesTagSet& tags = HumanitiesTagSet::defaults());

struct ScoredItem {
  std::string id;
  std::optional<AffinityScore> score;
};

struct FilterResult {
  std::vector<ScoredItem> kept;
  std::vector<ScoredItem> dropped;
};

// Throws DomainError naming the first unscored item.
FilterResult filter_by_affinity(const std::vector<ScoredItem>& items, int threshold = 2);

struct HumanJudgment {
  int title_bonus = 0;
  int abstract_adjustment = 0;
  std::string note;
};

// item_id,title_bonus,abstract_adjustment,note
std::map<std::string, HumanJudgment> load_judgments(const std::filesystem::path& csv_path);
std::map<std::string, HumanJudgment> parse_judgments(std::string_view csv_text);

std::vector<SubjectTag> venue_subjects(const harvest::VenueClassification& classification);

AffinityInputs inputs_for(const ingest::RetractedPublication& record, const harvest::LookupTables& tables,
                          const std::map<std::string, HumanJudgment>& judgments);

// Keeps entities citing at least one kept item; their cited_items are narrowed to kept ids.
std::vector<harvest::CitingEntity> prune_citations(const std::vector<harvest::CitingEntity>& entities,
                                                   const std::set<std::string>& kept_ids);

Json to_json(const AffinityScore& s);
AffinityScore score_from_json(const Json& j);
Json audit_json(const std::vector<ScoredItem>& items, int threshold);

}  // namespace retrace::affinity
