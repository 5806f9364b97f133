#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "factcheck/types.hpp"

namespace factcheck {

inline constexpr std::string_view kSubjectSlot = "<subject>";
inline constexpr std::string_view kObjectSlot = "<object>";
inline constexpr std::string_view kBackoffTemplateId = "backoff";

/// How the universal "The <predicate> of <subject> is <object>." template
/// spells the predicate.
enum class BackoffStyle {
  humanized,  // "numberOfPages" -> "number of pages"
  raw,        // inserted verbatim
};

/// A per-predicate sentence pattern. `object_guard`, when set, restricts the
/// template to triples whose object equals the guard (case-insensitive),
/// which is how boolean-valued predicates get one pattern per value.
struct Template {
  std::string id;
  std::string predicate;  // normalized registry key
  std::string pattern;
  std::optional<std::string> object_guard;

  bool has_subject_slot() const { return pattern.find(kSubjectSlot) != std::string::npos; }
  bool has_object_slot() const { return pattern.find(kObjectSlot) != std::string::npos; }

  friend bool operator==(const Template&, const Template&) = default;
};

/// Fills a template with the triple values and makes the sentence end in a
/// single terminal period. Ignores the object guard.
Fact fill_template(const Template& tpl, const Triple& t);

Fact render_backoff(const Triple& t, BackoffStyle style = BackoffStyle::humanized);

/// Predicate-keyed template lists. Keys are normalized with
/// text::predicate_key on insert and on lookup. Immutable once built, so
/// concurrent rendering is safe.
class TemplateRegistry {
 public:
  explicit TemplateRegistry(std::uint64_t seed = 0) : seed_(seed) {}

  /// Appends a pattern under `predicate`. Throws InvalidArgument when the
  /// pattern is blank, repeats a slot, or contains tabs/newlines.
  const Template& add(std::string_view predicate, std::string pattern,
                      std::optional<std::string> object_guard = std::nullopt);

  /// All templates under the normalized key; empty span when none.
  std::span<const Template> lookup(std::string_view predicate) const;

  /// Templates eligible for this triple: guard matches win over unguarded
  /// patterns; empty when the triple must back off.
  std::vector<const Template*> candidates(const Triple& t) const;

  /// Keys in first-insertion order.
  const std::vector<std::string>& predicates() const noexcept { return order_; }
  std::size_t size() const noexcept { return count_; }
  bool empty() const noexcept { return count_ == 0; }

  std::uint64_t seed() const noexcept { return seed_; }
  void set_seed(std::uint64_t seed) noexcept { seed_ = seed; }
  BackoffStyle backoff_style() const noexcept { return backoff_style_; }
  void set_backoff_style(BackoffStyle style) noexcept { backoff_style_ = style; }

  /// Compares contents only (keys, order, templates); seed and backoff
  /// style are run settings.
  bool same_contents(const TemplateRegistry& other) const;

  /// The eight handcrafted restaurant-domain templates.
  static TemplateRegistry e2e_default();

 private:
  std::uint64_t seed_;
  BackoffStyle backoff_style_ = BackoffStyle::humanized;
  std::vector<std::string> order_;
  std::unordered_map<std::string, std::vector<Template>> by_key_;
  std::size_t count_ = 0;
};

/// Renders a triple with the registry, falling back to the backoff template.
/// With several eligible templates, one is chosen by hashing the registry
/// seed, the predicate key and `draw`. The evaluator always passes 0, so a
/// given seed maps each predicate to one template for the whole run and
/// choices never depend on evaluation order.
Fact render(const Triple& t, const TemplateRegistry& reg, std::uint64_t draw = 0);

struct ExtractionItem {
  Triple triple;
  std::string reference;
};

struct ExtractionOptions {
  /// Keep patterns where only the object was found in the reference.
  bool keep_subject_free = false;
};

struct ExtractionStats {
  std::size_t kept = 0;
  std::size_t discarded = 0;
  std::size_t predicates = 0;
};

struct Extraction {
  TemplateRegistry registry;
  ExtractionStats stats;
};

/// Replaces the subject and object surface forms in `reference` with slots.
/// Matching is ASCII case-insensitive and the longer value is located first
/// so that a value contained in the other does not steal its span. Returns
/// nullopt when the reference cannot be delexicalized.
std::optional<std::string> delexicalize(const Triple& t, std::string_view reference,
                                        const ExtractionOptions& opts = {});

Extraction extract_templates(std::span<const ExtractionItem> corpus,
                             const ExtractionOptions& opts = {}, std::uint64_t seed = 0);

/// Line format: `predicate<TAB>[object_guard<TAB>]pattern`, '#' comments.
/// Repeated predicates concatenate in file order.
TemplateRegistry load_registry(std::istream& in);
TemplateRegistry load_registry(const std::filesystem::path& path);
void save_registry(const TemplateRegistry& reg, std::ostream& out);
std::string save_registry(const TemplateRegistry& reg);

}  // namespace factcheck
