#include "factcheck/templates.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "factcheck/errors.hpp"
#include "factcheck/text.hpp"

namespace factcheck {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::size_t count_of(std::string_view haystack, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

bool has_line_breaking_chars(std::string_view s) {
  return s.find_first_of("\t\r\n") != std::string_view::npos;
}

// Trailing whitespace removed, exactly one '.' appended unless the sentence
// already ends with one.
std::string finish_sentence(std::string s) {
  s = std::string(text::trim(s));
  if (s.empty() || s.back() != '.') s.push_back('.');
  return s;
}

std::string strip_terminal_periods(std::string_view pattern) {
  pattern = text::trim(pattern);
  while (!pattern.empty() && pattern.back() == '.') pattern.remove_suffix(1);
  return std::string(pattern);
}

}  // namespace

Fact fill_template(const Template& tpl, const Triple& t) {
  // The pattern's own period is dropped first so an object that ends in '.'
  // ("Inc.") does not produce a doubled period.
  const std::string pattern = strip_terminal_periods(tpl.pattern);
  struct Slot {
    std::size_t pos;
    std::string_view marker;
    const std::string* value;
  };
  std::vector<Slot> slots;
  for (Slot s : {Slot{0, kSubjectSlot, &t.subject()}, Slot{0, kObjectSlot, &t.object()}}) {
    s.pos = pattern.find(s.marker);
    if (s.pos != std::string::npos) slots.push_back(s);
  }
  std::sort(slots.begin(), slots.end(), [](const Slot& a, const Slot& b) { return a.pos < b.pos; });

  std::string out;
  std::size_t cursor = 0;
  for (const Slot& s : slots) {
    out.append(pattern, cursor, s.pos - cursor);
    out.append(*s.value);
    cursor = s.pos + s.marker.size();
  }
  out.append(pattern, cursor);
  return Fact{finish_sentence(std::move(out)), t, tpl.id, false};
}

Fact render_backoff(const Triple& t, BackoffStyle style) {
  std::string predicate =
      style == BackoffStyle::raw ? t.predicate() : text::humanize(t.predicate());
  if (predicate.empty()) predicate = std::string(text::trim(t.predicate()));
  std::string sentence = "The " + predicate + " of " + t.subject() + " is " + t.object();
  return Fact{finish_sentence(std::move(sentence)), t, std::string(kBackoffTemplateId), true};
}

const Template& TemplateRegistry::add(std::string_view predicate, std::string pattern,
                                      std::optional<std::string> object_guard) {
  std::string key = text::predicate_key(predicate);
  if (key.empty()) {
    throw InvalidArgument("predicate '" + std::string(predicate) + "' has no word characters");
  }
  if (text::is_blank(pattern)) throw InvalidArgument("template pattern is empty");
  if (has_line_breaking_chars(pattern)) {
    throw InvalidArgument("template pattern contains a tab or line break");
  }
  if (count_of(pattern, kSubjectSlot) > 1 || count_of(pattern, kObjectSlot) > 1) {
    throw InvalidArgument("template pattern repeats a slot: " + pattern);
  }
  if (object_guard) {
    object_guard = std::string(text::trim(*object_guard));
    if (object_guard->empty() || has_line_breaking_chars(*object_guard)) {
      throw InvalidArgument("invalid object guard for predicate '" + key + "'");
    }
  }

  auto [it, inserted] = by_key_.try_emplace(key);
  if (inserted) order_.push_back(key);
  auto& list = it->second;
  std::string id = key + "#" + std::to_string(list.size());
  list.push_back(Template{std::move(id), key, std::move(pattern), std::move(object_guard)});
  ++count_;
  return list.back();
}

std::span<const Template> TemplateRegistry::lookup(std::string_view predicate) const {
  auto it = by_key_.find(text::predicate_key(predicate));
  if (it == by_key_.end()) return {};
  return it->second;
}

std::vector<const Template*> TemplateRegistry::candidates(const Triple& t) const {
  std::vector<const Template*> guarded;
  std::vector<const Template*> open;
  const std::string object = text::ascii_lower(text::trim(t.object()));
  for (const Template& tpl : lookup(t.predicate())) {
    if (!tpl.object_guard) {
      open.push_back(&tpl);
    } else if (text::ascii_lower(*tpl.object_guard) == object) {
      guarded.push_back(&tpl);
    }
  }
  return guarded.empty() ? open : guarded;
}

bool TemplateRegistry::same_contents(const TemplateRegistry& other) const {
  return order_ == other.order_ && by_key_ == other.by_key_;
}

TemplateRegistry TemplateRegistry::e2e_default() {
  TemplateRegistry reg;
  reg.add("eat_type", "<subject> is a <object>.");
  reg.add("food", "<subject> serves <object>.");
  reg.add("price_range", "<subject> is in the <object> price range.");
  reg.add("customer_rating", "<subject> has <object> customer rating.");
  reg.add("area", "<subject> is located in the <object>.");
  reg.add("family_friendly", "<subject> is family-friendly.", "yes");
  reg.add("family_friendly", "<subject> is not family-friendly.", "no");
  reg.add("near", "<subject> is located near <object>.");
  return reg;
}

Fact render(const Triple& t, const TemplateRegistry& reg, std::uint64_t draw) {
  const auto options = reg.candidates(t);
  if (options.empty()) return render_backoff(t, reg.backoff_style());
  std::size_t pick = 0;
  if (options.size() > 1) {
    const std::uint64_t h =
        splitmix64(reg.seed() ^ splitmix64(draw ^ fnv1a(options.front()->predicate)));
    pick = static_cast<std::size_t>(h % options.size());
  }
  return fill_template(*options[pick], t);
}

std::optional<std::string> delexicalize(const Triple& t, std::string_view reference,
                                        const ExtractionOptions& opts) {
  reference = text::trim(reference);
  if (reference.empty() || has_line_breaking_chars(reference)) return std::nullopt;

  struct Span {
    std::size_t pos = std::string_view::npos;
    std::size_t len = 0;
    std::string_view slot;
    bool found() const { return pos != std::string_view::npos; }
  };
  Span subject{std::string_view::npos, t.subject().size(), kSubjectSlot};
  Span object{std::string_view::npos, t.object().size(), kObjectSlot};
  const bool object_first = t.object().size() > t.subject().size();
  Span& longer = object_first ? object : subject;
  Span& shorter = object_first ? subject : object;
  const std::string& longer_value = object_first ? t.object() : t.subject();
  const std::string& shorter_value = object_first ? t.subject() : t.object();

  longer.pos = text::ifind(reference, longer_value);
  for (auto pos = text::ifind(reference, shorter_value); pos != std::string_view::npos;
       pos = text::ifind(reference, shorter_value, pos + 1)) {
    const bool overlaps =
        longer.found() && pos < longer.pos + longer.len && longer.pos < pos + shorter.len;
    if (!overlaps) {
      shorter.pos = pos;
      break;
    }
  }

  if (!object.found()) return std::nullopt;
  if (!subject.found() && !opts.keep_subject_free) return std::nullopt;

  std::vector<Span> spans{object};
  if (subject.found()) spans.push_back(subject);
  std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) { return a.pos < b.pos; });

  std::string pattern;
  std::size_t cursor = 0;
  for (const Span& s : spans) {
    pattern.append(reference.substr(cursor, s.pos - cursor));
    pattern.append(s.slot);
    cursor = s.pos + s.len;
  }
  pattern.append(reference.substr(cursor));
  return pattern;
}

Extraction extract_templates(std::span<const ExtractionItem> corpus,
                             const ExtractionOptions& opts, std::uint64_t seed) {
  Extraction out{TemplateRegistry(seed), {}};
  for (const ExtractionItem& item : corpus) {
    auto pattern = delexicalize(item.triple, item.reference, opts);
    if (!pattern) {
      ++out.stats.discarded;
      continue;
    }
    try {
      out.registry.add(item.triple.predicate(), std::move(*pattern));
    } catch (const InvalidArgument&) {
      // reference already contained a literal slot marker
      ++out.stats.discarded;
      continue;
    }
    ++out.stats.kept;
  }
  out.stats.predicates = out.registry.predicates().size();
  return out;
}

TemplateRegistry load_registry(std::istream& in) {
  TemplateRegistry reg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto trimmed = text::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;

    std::vector<std::string> fields;
    std::size_t start = 0;
    for (auto tab = line.find('\t'); tab != std::string::npos; tab = line.find('\t', start)) {
      fields.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    fields.push_back(line.substr(start));
    if (fields.size() < 2 || fields.size() > 3) {
      throw ParseError(line_no, "",
                       "expected 'predicate<TAB>[object_guard<TAB>]pattern', got " +
                           std::to_string(fields.size()) + " field(s)");
    }
    std::optional<std::string> guard;
    if (fields.size() == 3) guard = fields[1];
    try {
      reg.add(fields.front(), fields.back(), std::move(guard));
    } catch (const InvalidArgument& e) {
      throw ParseError(line_no, "", e.what());
    }
  }
  return reg;
}

TemplateRegistry load_registry(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open template registry " + path.string());
  return load_registry(in);
}

void save_registry(const TemplateRegistry& reg, std::ostream& out) {
  out << "# predicate<TAB>[object_guard<TAB>]pattern\n";
  for (const std::string& key : reg.predicates()) {
    for (const Template& tpl : reg.lookup(key)) {
      out << key << '\t';
      if (tpl.object_guard) out << *tpl.object_guard << '\t';
      out << tpl.pattern << '\n';
    }
  }
}

std::string save_registry(const TemplateRegistry& reg) {
  std::ostringstream out;
  save_registry(reg, out);
  return out.str();
}

}  // namespace factcheck
