#pragma once

#include <sstream>
#include <string>

namespace acceptance {

// Collects failed checks for one criterion; the first few are kept for the report line.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    ++total_;
    if (ok) return;
    if (failed_++ < 3) {
      if (!first_.empty()) first_ += "; ";
      first_ += what;
    }
  }
  void note(const std::string& s) {
    if (!notes_.empty()) notes_ += ", ";
    notes_ += s;
  }
  bool ok() const { return failed_ == 0; }
  std::string summary() const {
    std::ostringstream os;
    if (failed_ == 0) {
      os << total_ << " checks";
    } else {
      os << failed_ << "/" << total_ << " checks failed: " << first_;
    }
    if (!notes_.empty()) os << " [" << notes_ << "]";
    return os.str();
  }

 private:
  long long total_ = 0;
  long long failed_ = 0;
  std::string first_;
  std::string notes_;
};

void merge_arithmetic(Checks& c);
void fifth_assignment(Checks& c);
void affinity_rules(Checks& c);
void lda_sampler(Checks& c);
void relevance_and_map(Checks& c);
void reports_oracle(Checks& c);
void decision_tree_and_store(Checks& c);
void end_to_end(Checks& c);

}  // namespace acceptance
