// Copyright 2026 The vfm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vfm/protocol.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <thread>
#include <tuple>
#include <unordered_set>

#include "vfm/errors.h"
#include "vfm/kernels.h"
#include "vfm/objective.h"
#include "vfm/rng.h"

namespace vfm {

std::string ActorName(ActorId id) {
  return id == kServer ? "server" : "P" + std::to_string(id);
}

std::string_view TagName(MessageTag tag) {
  switch (tag) {
    case MessageTag::kAllocate:
      return "allocate";
    case MessageTag::kCrossInit:
      return "cross-init";
    case MessageTag::kShareLead:
      return "share-lead";
    case MessageTag::kSharePartner:
      return "share-partner";
    case MessageTag::kOpeningLead:
      return "opening-lead";
    case MessageTag::kOpeningServer:
      return "opening-server";
    case MessageTag::kResultShare:
      return "result-share";
    case MessageTag::kDebugPlain:
      return "debug-plain";
    case MessageTag::kDebugResult:
      return "debug-result";
    case MessageTag::kPeerResult:
      return "peer-result";
    case MessageTag::kSingleCoeff:
      return "single-coeff";
    case MessageTag::kCrossCoeff:
      return "cross-coeff";
    case MessageTag::kModel:
      return "model";
  }
  return "?";
}

namespace {

// FNV-1a applied to 64-bit words rather than bytes; payloads run to
// megabytes and the byte-serial multiply chain dominated large runs.
class Fnv1a {
 public:
  void AddWord(std::uint64_t w) {
    hash_ ^= w;
    hash_ *= 0x100000001b3ULL;
  }
  template <typename T>
  void AddValue(const T& v) {
    static_assert(sizeof(T) <= sizeof(std::uint64_t));
    std::uint64_t w = 0;
    std::memcpy(&w, &v, sizeof(v));
    AddWord(w);
  }
  std::uint64_t hash() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

}  // namespace

std::uint64_t Message::Digest() const {
  Fnv1a h;
  h.AddValue(static_cast<int>(tag));
  h.AddValue(sender);
  h.AddValue(receiver);
  h.AddValue(static_cast<std::uint64_t>(coeff));
  h.AddValue(static_cast<unsigned char>(debug_audit));
  h.AddValue(static_cast<unsigned char>(noised));
  for (double r : reals) h.AddValue(r);
  for (const FieldElement& e : elements) {
    const uint128 v = e.value();
    h.AddValue(static_cast<std::uint64_t>(v));
    h.AddValue(static_cast<std::uint64_t>(v >> 64));
  }
  for (std::uint64_t i : indices) h.AddValue(i);
  return h.hash();
}

void ProtocolTranscript::Append(const Message& message) {
  TranscriptEntry entry;
  entry.digest = message.Digest();
  if (retain_payloads_) {
    entry.message = message;
  } else {
    entry.message.seq = message.seq;
    entry.message.sender = message.sender;
    entry.message.receiver = message.receiver;
    entry.message.tag = message.tag;
    entry.message.coeff = message.coeff;
    entry.message.debug_audit = message.debug_audit;
    entry.message.noised = message.noised;
  }
  entries_.push_back(std::move(entry));
}

ProtocolTranscript ProtocolTranscript::Canonicalize() const {
  ProtocolTranscript out(retain_payloads_);
  out.entries_ = entries_;
  auto key = [](const TranscriptEntry& e) {
    const Message& m = e.message;
    // Allocation first, model broadcast last, coefficients in between.
    const std::size_t group = m.tag == MessageTag::kModel ? kNoCoefficient
                              : m.coeff == kNoCoefficient ? 0
                                                          : m.coeff + 1;
    return std::make_tuple(group, static_cast<int>(m.tag), m.sender,
                           m.receiver, e.digest);
  };
  std::stable_sort(out.entries_.begin(), out.entries_.end(),
                   [&](const TranscriptEntry& a, const TranscriptEntry& b) {
                     return key(a) < key(b);
                   });
  std::uint64_t seq = 0;
  for (auto& e : out.entries_) e.message.seq = ++seq;
  return out;
}

std::string ProtocolTranscript::ExportLines() const {
  std::string out;
  char digest[17];
  for (const auto& e : entries_) {
    const Message& m = e.message;
    std::snprintf(digest, sizeof(digest), "%016llx",
                  static_cast<unsigned long long>(e.digest));
    out += std::to_string(m.seq);
    out += '\t';
    out += ActorName(m.sender);
    out += '\t';
    out += ActorName(m.receiver);
    out += '\t';
    out += TagName(m.tag);
    out += '\t';
    out += m.coeff == kNoCoefficient ? "-" : std::to_string(m.coeff);
    out += '\t';
    out += digest;
    out += '\n';
  }
  return out;
}

std::size_t ProtocolTranscript::Count(MessageTag tag) const {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(),
                    [tag](const auto& e) { return e.message.tag == tag; }));
}

std::string_view SchedulerName(SchedulerKind kind) {
  return kind == SchedulerKind::kDeterministic ? "deterministic" : "threaded";
}

SchedulerKind ParseScheduler(std::string_view name) {
  if (name == "deterministic") return SchedulerKind::kDeterministic;
  if (name == "threaded") return SchedulerKind::kThreaded;
  throw InputError("unknown scheduler '" + std::string(name) +
                   "' (expected deterministic or threaded)");
}

double SubmissionAllowance(TaskKind task, CoeffIndex index, Eigen::Index n,
                           double noise_scale) {
  const double per_record = IsDataDependent(task, index)
                                ? WorstCaseMagnitude(task, index)
                                : kLogisticConstant;
  return per_record * static_cast<double>(n) + 50.0 * noise_scale;
}

namespace {

class Outbox {
 public:
  explicit Outbox(ActorId self) : self_(self) {}
  Message& Send(ActorId to, MessageTag tag, std::size_t coeff) {
    Message m;
    m.sender = self_;
    m.receiver = to;
    m.tag = tag;
    m.coeff = coeff;
    messages_.push_back(std::move(m));
    return messages_.back();
  }
  std::vector<Message> Take() { return std::exchange(messages_, {}); }

 private:
  ActorId self_;
  std::vector<Message> messages_;
};

// Hands each holder its share of a per-coefficient triple batch and tracks
// consumption. Shared by the lead parties and the server, so it locks.
class TripleService {
 public:
  explicit TripleService(std::uint64_t seed) : seed_(seed) {}

  TripleShare Fetch(std::size_t flat, int holder, std::size_t n) {
    std::lock_guard lock(mu_);
    Batch& batch = batches_[flat];
    if (!batch.issued) {
      Dealer dealer(DeriveSeed(seed_, SeedDomain::kDealer, flat));
      auto [t0, t1] = dealer.Issue(n);
      batch.shares[0].emplace(std::move(t0));
      batch.shares[1].emplace(std::move(t1));
      batch.size = n;
      batch.issued = true;
      issued_ += n;
    }
    if (!batch.shares[holder]) {
      throw ProtocolError("triple batch for coefficient " +
                          std::to_string(flat) + " fetched twice by holder " +
                          std::to_string(holder));
    }
    TripleShare share = std::move(*batch.shares[holder]);
    batch.shares[holder].reset();
    return share;
  }

  void MarkConsumed(std::size_t flat, int holder) {
    std::lock_guard lock(mu_);
    batches_.at(flat).consumed[holder] = true;
  }

  TripleLedger Ledger() const {
    std::lock_guard lock(mu_);
    TripleLedger ledger;
    ledger.issued = issued_;
    for (const auto& [flat, batch] : batches_) {
      if (batch.consumed[0] && batch.consumed[1]) {
        ledger.consumed += batch.size;
        ++ledger.dot_products;
      }
    }
    return ledger;
  }

 private:
  struct Batch {
    std::optional<TripleShare> shares[2];
    bool consumed[2] = {false, false};
    std::size_t size = 0;
    bool issued = false;
  };
  std::uint64_t seed_;
  mutable std::mutex mu_;
  std::map<std::size_t, Batch> batches_;
  std::uint64_t issued_ = 0;
};

struct RunContext {
  const CoefficientAllocation& allocation;
  const VerticalPartition& partition;
  const PrivacyBudget& budget;
  const ProtocolOptions& options;
  FixedPointCodec codec;
  Eigen::Index n;
  TripleService& triples;
};

class Actor {
 public:
  virtual ~Actor() = default;
  virtual void Handle(Message message, Outbox& out) = 0;
};

std::vector<FieldElement> Concat(const std::vector<FieldElement>& a,
                                 const std::vector<FieldElement>& b) {
  std::vector<FieldElement> out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

BeaverOpening SplitOpening(const std::vector<FieldElement>& elements) {
  const std::size_t half = elements.size() / 2;
  BeaverOpening out;
  out.e.assign(elements.begin(), elements.begin() + half);
  out.f.assign(elements.begin() + half, elements.end());
  return out;
}

// A party holding only its own feature columns, plus the label if it is the
// label owner.
class PartyActor final : public Actor {
 public:
  PartyActor(PartyId id, const RunContext& ctx,
             std::map<int, Eigen::VectorXd> columns,
             std::optional<Eigen::VectorXd> label_column)
      : id_(id),
        ctx_(ctx),
        columns_(std::move(columns)),
        label_column_(std::move(label_column)) {}

  const std::optional<Eigen::VectorXd>& weights() const { return weights_; }

  void Handle(Message m, Outbox& out) override {
    switch (m.tag) {
      case MessageTag::kAllocate:
        return OnAllocate(m, out);
      case MessageTag::kCrossInit:
        return OnCrossInit(m, out);
      case MessageTag::kSharePartner:
        return OnPartnerShare(std::move(m), out);
      case MessageTag::kOpeningServer:
        Lead(m).server_opening = SplitOpening(m.elements);
        return TryFinish(m.coeff, out);
      case MessageTag::kResultShare:
        if (m.elements.size() != 1) Fail(m, "malformed result share");
        Lead(m).server_result = m.elements[0];
        return TryFinish(m.coeff, out);
      case MessageTag::kDebugResult:
        if (m.reals.size() != 1) Fail(m, "malformed debug result");
        Lead(m).debug_result = m.reals[0];
        return TryFinish(m.coeff, out);
      case MessageTag::kPeerResult:
        if (!peer_results_.emplace(m.coeff, m.reals.at(0)).second) {
          Fail(m, "duplicate peer result");
        }
        return;
      case MessageTag::kModel:
        weights_ = Eigen::Map<const Eigen::VectorXd>(
            m.reals.data(), static_cast<Eigen::Index>(m.reals.size()));
        return;
      default:
        Fail(m, "unexpected message");
    }
  }

 private:
  struct LeadState {
    bool initialized = false;
    bool opened = false;
    bool done = false;
    ShareVector own;
    std::optional<ShareVector> partner;
    std::optional<TripleShare> triple;
    std::optional<BeaverOpening> server_opening;
    std::optional<FieldElement> server_result;
    std::optional<double> debug_result;
  };

  [[noreturn]] void Fail(const Message& m, const std::string& what) const {
    throw ProtocolError(ActorName(id_) + ": " + what + " (" +
                        std::string(TagName(m.tag)) + " from " +
                        ActorName(m.sender) + ", coefficient " +
                        (m.coeff == kNoCoefficient ? std::string("-")
                                                   : std::to_string(m.coeff)) +
                        ")");
  }

  const AllocationEntry& CrossEntry(const Message& m) const {
    if (m.coeff >= ctx_.allocation.size()) Fail(m, "unknown coefficient");
    const AllocationEntry& e = ctx_.allocation.at(m.coeff);
    if (e.kind != CoeffKind::kCrossParty || !e.Involves(id_)) {
      Fail(m, "coefficient not allocated to this party pair");
    }
    return e;
  }

  LeadState& Lead(const Message& m) {
    const AllocationEntry& e = CrossEntry(m);
    if (e.noise_adder != id_ || m.sender != kServer) {
      Fail(m, "only the server may send this to the lead party");
    }
    return lead_[m.coeff];
  }

  bool Owns(const CoefficientRecipe::Factor& f) const {
    return f.is_label ? label_column_.has_value()
                      : columns_.count(f.feature) > 0;
  }

  std::span<const double> Vector(const CoefficientRecipe::Factor& f) const {
    if (f.is_label) {
      if (!label_column_) {
        throw ProtocolError(ActorName(id_) + " does not hold the label");
      }
      return kernels::Span(*label_column_);
    }
    const auto it = columns_.find(f.feature);
    if (it == columns_.end()) {
      throw ProtocolError(ActorName(id_) + " does not hold feature " +
                          std::to_string(f.feature));
    }
    return kernels::Span(it->second);
  }

  // This party's factor of a cross coefficient.
  const CoefficientRecipe::Factor& MyFactor(const CoefficientRecipe& r) const {
    return Owns(r.u) ? r.u : r.v;
  }

  void OnAllocate(const Message& m, Outbox& out) {
    if (m.sender != kServer || allocated_) Fail(m, "unexpected allocation");
    if (m.indices.size() != m.reals.size()) Fail(m, "malformed allocation");
    allocated_ = true;
    std::vector<NoiseRequest> requests;
    for (std::size_t i = 0; i < m.indices.size(); ++i) {
      requests.push_back({static_cast<std::size_t>(m.indices[i]), m.reals[i]});
    }
    const std::vector<double> noise = DrawNoise(
        requests, id_, ctx_.options.noise_mode, ctx_.options.seed);
    for (std::size_t i = 0; i < requests.size(); ++i) {
      noise_[requests[i].flat] = noise[i];
    }
    const TaskKind task = ctx_.allocation.task();
    for (const AllocationEntry& e : ctx_.allocation.entries()) {
      if (e.kind != CoeffKind::kSingleParty || e.first != id_) continue;
      double value;
      if (!IsDataDependent(task, e.index)) {
        value = kLogisticConstant * static_cast<double>(ctx_.n);
      } else {
        const CoefficientRecipe r = RecipeFor(task, e.index);
        value = r.scale * kernels::Dot(Vector(r.u), Vector(r.v));
      }
      Submit(e, value, MessageTag::kSingleCoeff, out);
    }
  }

  void Submit(const AllocationEntry& e, double value, MessageTag tag,
              Outbox& out) {
    const std::size_t flat = e.index.Flat(ctx_.allocation.dim());
    Message& msg = out.Send(kServer, tag, flat);
    const bool skip = ctx_.options.skip_noise_on == flat;
    if (e.perturbed && !skip) {
      const auto it = noise_.find(flat);
      if (it == noise_.end()) {
        throw ProtocolError(ActorName(id_) + " has no noise duty for " +
                            e.index.Name());
      }
      value += it->second;
      msg.noised = true;
    }
    msg.reals = {value};
  }

  void OnCrossInit(const Message& m, Outbox& out) {
    if (m.sender != kServer) Fail(m, "cross-init must come from the server");
    if (!allocated_) Fail(m, "cross-init before allocation");
    const AllocationEntry& e = CrossEntry(m);
    const CoefficientRecipe r = RecipeFor(ctx_.allocation.task(), e.index);
    const std::span<const double> mine = Vector(MyFactor(r));
    const bool lead = e.noise_adder == id_;
    const bool debug = ctx_.options.backend == SecureBackend::kPlaintextDebug;

    if (lead) {
      LeadState& s = lead_[m.coeff];
      if (s.initialized) Fail(m, "duplicate cross-init");
      s.initialized = true;
    } else if (!partner_started_.insert(m.coeff).second) {
      Fail(m, "duplicate cross-init");
    }

    if (debug) {
      Message& plain = out.Send(kServer, MessageTag::kDebugPlain, m.coeff);
      plain.debug_audit = true;
      plain.reals.assign(mine.begin(), mine.end());
      return;
    }

    std::vector<FieldElement> encoded(mine.size());
    for (std::size_t i = 0; i < mine.size(); ++i) {
      encoded[i] = ctx_.codec.Encode(mine[i]);
    }
    NoiseStream stream(ctx_.options.seed, SeedDomain::kShares,
                       2 * m.coeff + (lead ? 0 : 1));
    auto [s0, s1] = Share(encoded, stream);
    if (lead) {
      LeadState& s = lead_[m.coeff];
      s.own = std::move(s0);
      s.triple.emplace(ctx_.triples.Fetch(m.coeff, 0, mine.size()));
      out.Send(kServer, MessageTag::kShareLead, m.coeff).elements =
          std::move(s1.values);
      TryOpen(m.coeff, out);
    } else {
      out.Send(e.noise_adder, MessageTag::kSharePartner, m.coeff).elements =
          std::move(s0.values);
      out.Send(kServer, MessageTag::kSharePartner, m.coeff).elements =
          std::move(s1.values);
    }
  }

  void OnPartnerShare(Message m, Outbox& out) {
    const AllocationEntry& e = CrossEntry(m);
    if (e.noise_adder != id_ || m.sender != e.Partner()) {
      Fail(m, "partner share from the wrong party");
    }
    LeadState& s = lead_[m.coeff];
    if (s.partner) Fail(m, "duplicate partner share");
    s.partner = ShareVector{std::move(m.elements)};
    TryOpen(m.coeff, out);
  }

  void TryOpen(std::size_t flat, Outbox& out) {
    LeadState& s = lead_[flat];
    if (!s.initialized || !s.partner || s.opened) return;
    s.opened = true;
    const BeaverOpening mine =
        BeaverOpen(s.own.values, s.partner->values, s.triple->Consume());
    out.Send(kServer, MessageTag::kOpeningLead, flat).elements =
        Concat(mine.e, mine.f);
  }

  void TryFinish(std::size_t flat, Outbox& out) {
    LeadState& s = lead_[flat];
    if (s.done) {
      throw ProtocolError(ActorName(id_) + ": extra result for coefficient " +
                          std::to_string(flat));
    }
    const AllocationEntry& e = ctx_.allocation.at(flat);
    const CoefficientRecipe r = RecipeFor(ctx_.allocation.task(), e.index);
    double dot;
    if (ctx_.options.backend == SecureBackend::kPlaintextDebug) {
      if (!s.initialized || !s.debug_result) return;
      dot = *s.debug_result;
    } else {
      if (!s.server_opening || !s.server_result) return;
      if (!s.opened) {
        throw ProtocolError(ActorName(id_) +
                            ": server opening arrived before our own for " +
                            e.index.Name());
      }
      const kernels::TripleColumns& t = s.triple->columns();
      const BeaverOpening opened = CombineOpenings(
          BeaverOpen(s.own.values, s.partner->values, t), *s.server_opening);
      const FieldElement z = BeaverDotShare(opened, t, 0) + *s.server_result;
      ctx_.triples.MarkConsumed(flat, 0);
      dot = ctx_.codec.DecodeProduct(z);
      s.own = {};
      s.partner.reset();
      s.triple.reset();
      s.server_opening.reset();
    }
    s.done = true;
    const double value = r.scale * dot;
    out.Send(e.Partner(), MessageTag::kPeerResult, flat).reals = {value};
    Submit(e, value, MessageTag::kCrossCoeff, out);
  }

  PartyId id_;
  const RunContext& ctx_;
  std::map<int, Eigen::VectorXd> columns_;
  std::optional<Eigen::VectorXd> label_column_;
  bool allocated_ = false;
  std::map<std::size_t, double> noise_;
  std::map<std::size_t, LeadState> lead_;
  std::unordered_set<std::size_t> partner_started_;
  std::map<std::size_t, double> peer_results_;
  std::optional<Eigen::VectorXd> weights_;
};

class ServerActor final : public Actor {
 public:
  static constexpr std::size_t kCrossWindow = 64;

  explicit ServerActor(const RunContext& ctx)
      : ctx_(ctx),
        values_(ctx.allocation.size(), 0.0),
        received_(ctx.allocation.size(), false) {}

  bool done() const { return done_; }
  const PolyObjective& objective() const { return objective_; }
  const MinimizeReport& report() const { return report_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  std::size_t secure_dots() const { return secure_dots_; }

  void Start(Outbox& out) {
    const CoefficientAllocation& alloc = ctx_.allocation;
    for (PartyId k = 1; k <= ctx_.partition.num_parties(); ++k) {
      Message& m = out.Send(k, MessageTag::kAllocate, kNoCoefficient);
      for (std::size_t flat = 0; flat < alloc.size(); ++flat) {
        const AllocationEntry& e = alloc.at(flat);
        if (e.noise_adder != k) continue;
        m.indices.push_back(flat);
        m.reals.push_back(ctx_.budget.NoiseScale(e));
      }
    }
    for (std::size_t flat = 0; flat < alloc.size(); ++flat) {
      if (alloc.at(flat).kind == CoeffKind::kCrossParty) {
        pending_cross_.push_back(flat);
      }
    }
    // Only a bounded number of products are in flight; each holds
    // O(n) shares and triples at every participant.
    for (std::size_t i = 0; i < kCrossWindow; ++i) StartNextCross(out);
  }

  void Handle(Message m, Outbox& out) override {
    if (m.coeff >= ctx_.allocation.size()) Fail(m, "unknown coefficient");
    const AllocationEntry& e = ctx_.allocation.at(m.coeff);
    switch (m.tag) {
      case MessageTag::kShareLead:
        Expect(m, e, e.noise_adder);
        Store(m, Cross(m).lead_share, std::move(m.elements));
        return TryRespond(m.coeff, out);
      case MessageTag::kSharePartner:
        Expect(m, e, e.Partner());
        Store(m, Cross(m).partner_share, std::move(m.elements));
        return TryRespond(m.coeff, out);
      case MessageTag::kOpeningLead:
        Expect(m, e, e.noise_adder);
        Store(m, Cross(m).lead_opening, std::move(m.elements));
        return TryRespond(m.coeff, out);
      case MessageTag::kDebugPlain: {
        if (ctx_.options.backend != SecureBackend::kPlaintextDebug) {
          Fail(m, "plaintext vector outside the debug backend");
        }
        CrossState& s = Cross(m);
        if (m.sender == e.noise_adder) {
          Store(m, s.lead_plain, std::move(m.reals));
        } else {
          Expect(m, e, e.Partner());
          Store(m, s.partner_plain, std::move(m.reals));
        }
        return TryRespond(m.coeff, out);
      }
      case MessageTag::kSingleCoeff:
      case MessageTag::kCrossCoeff:
        return OnCoefficient(m, e, out);
      default:
        Fail(m, "unexpected message");
    }
  }

 private:
  struct CrossState {
    std::optional<std::vector<FieldElement>> lead_share, partner_share,
        lead_opening;
    std::optional<std::vector<double>> lead_plain, partner_plain;
    bool responded = false;
  };

  [[noreturn]] void Fail(const Message& m, const std::string& what) const {
    throw ProtocolError("server: " + what + " (" +
                        std::string(TagName(m.tag)) + " from " +
                        ActorName(m.sender) + ", coefficient " +
                        std::to_string(m.coeff) + ")");
  }

  void Expect(const Message& m, const AllocationEntry& e, PartyId from) const {
    if (e.kind != CoeffKind::kCrossParty) Fail(m, "not a cross coefficient");
    if (m.sender != from) Fail(m, "message from the wrong party");
  }

  CrossState& Cross(const Message& m) {
    if (received_[m.coeff]) Fail(m, "message after the coefficient arrived");
    CrossState& s = cross_[m.coeff];
    if (s.responded) Fail(m, "message after the product was formed");
    return s;
  }

  template <typename T>
  void Store(const Message& m, std::optional<T>& slot, T value) const {
    if (slot) Fail(m, "duplicate message");
    slot = std::move(value);
  }

  void TryRespond(std::size_t flat, Outbox& out) {
    CrossState& s = cross_[flat];
    if (ctx_.options.backend == SecureBackend::kPlaintextDebug) {
      if (!s.lead_plain || !s.partner_plain) return;
      s.responded = true;
      Message& m = out.Send(ctx_.allocation.at(flat).noise_adder,
                            MessageTag::kDebugResult, flat);
      m.debug_audit = true;
      m.reals = {kernels::Dot(*s.lead_plain, *s.partner_plain)};
      s.lead_plain.reset();
      s.partner_plain.reset();
      ++secure_dots_;
      return;
    }
    if (!s.lead_share || !s.partner_share || !s.lead_opening) return;
    if (s.lead_share->size() != s.partner_share->size() ||
        s.lead_opening->size() != 2 * s.lead_share->size()) {
      throw ProtocolError("server: share lengths disagree for coefficient " +
                          std::to_string(flat));
    }
    s.responded = true;
    TripleShare triple = ctx_.triples.Fetch(flat, 1, s.lead_share->size());
    const kernels::TripleColumns& t = triple.Consume();
    const BeaverOpening mine = BeaverOpen(*s.lead_share, *s.partner_share, t);
    const BeaverOpening opened =
        CombineOpenings(mine, SplitOpening(*s.lead_opening));
    const FieldElement z1 = BeaverDotShare(opened, t, 1);
    ctx_.triples.MarkConsumed(flat, 1);
    const ActorId lead = ctx_.allocation.at(flat).noise_adder;
    out.Send(lead, MessageTag::kOpeningServer, flat).elements =
        Concat(mine.e, mine.f);
    out.Send(lead, MessageTag::kResultShare, flat).elements = {z1};
    s.lead_share.reset();
    s.partner_share.reset();
    s.lead_opening.reset();
    ++secure_dots_;
  }

  void StartNextCross(Outbox& out) {
    if (pending_cross_.empty()) return;
    const std::size_t flat = pending_cross_.front();
    pending_cross_.pop_front();
    const AllocationEntry& e = ctx_.allocation.at(flat);
    for (ActorId to : {e.noise_adder, e.Partner()}) {
      Message& m = out.Send(to, MessageTag::kCrossInit, flat);
      m.indices = {static_cast<std::uint64_t>(e.noise_adder),
                   static_cast<std::uint64_t>(e.Partner())};
    }
  }

  void OnCoefficient(const Message& m, const AllocationEntry& e, Outbox& out) {
    const bool cross = m.tag == MessageTag::kCrossCoeff;
    if (cross != (e.kind == CoeffKind::kCrossParty)) {
      Fail(m, "submission tag does not match the allocation");
    }
    if (m.sender != e.noise_adder) Fail(m, "submitted by the wrong party");
    if (received_[m.coeff]) Fail(m, "duplicate submission");
    if (m.reals.size() != 1) Fail(m, "malformed submission");
    double value = m.reals[0];
    const double scale = ctx_.budget.NoiseScale(e);
    const double allowance =
        SubmissionAllowance(ctx_.allocation.task(), e.index, ctx_.n, scale);
    if (!std::isfinite(value) || std::abs(value) > allowance) {
      warnings_.push_back("coefficient " + e.index.Name() + " from " +
                          ActorName(m.sender) + " is out of range (" +
                          std::to_string(value) + "); clamped to +/-" +
                          std::to_string(allowance));
      value = std::isfinite(value) ? std::clamp(value, -allowance, allowance)
                                   : 0.0;
    }
    received_[m.coeff] = true;
    values_[m.coeff] = value;
    if (cross) {
      cross_.erase(m.coeff);
      StartNextCross(out);
    }
    if (++count_ < values_.size()) return;

    objective_ = PolyObjective::Unflatten(values_, ctx_.allocation.dim());
    const double floor = ctx_.options.ridge_floor >= 0.0
                             ? ctx_.options.ridge_floor
                             : DefaultRidgeFloor(ctx_.n);
    report_ = MinimizeDetailed(objective_, floor);
    for (PartyId k = 1; k <= ctx_.partition.num_parties(); ++k) {
      out.Send(k, MessageTag::kModel, kNoCoefficient)
          .reals.assign(report_.weights.data(),
                        report_.weights.data() + report_.weights.size());
    }
    done_ = true;
  }

  const RunContext& ctx_;
  std::vector<double> values_;
  std::vector<bool> received_;
  std::size_t count_ = 0;
  std::map<std::size_t, CrossState> cross_;
  std::deque<std::size_t> pending_cross_;
  PolyObjective objective_;
  MinimizeReport report_;
  std::vector<std::string> warnings_;
  std::size_t secure_dots_ = 0;
  bool done_ = false;
};

class Network {
 public:
  Network(std::vector<Actor*> actors, ProtocolTranscript& transcript)
      : actors_(std::move(actors)), transcript_(transcript) {}
  virtual ~Network() = default;

  // Delivers messages until no actor has work left.
  virtual void Run(std::vector<Message> initial) = 0;

 protected:
  std::vector<Actor*> actors_;
  ProtocolTranscript& transcript_;
};

class DeterministicNetwork final : public Network {
 public:
  using Network::Network;

  void Run(std::vector<Message> initial) override {
    std::deque<Message> queue;
    std::uint64_t seq = 0;
    auto post = [&](std::vector<Message> batch) {
      for (Message& m : batch) {
        m.seq = ++seq;
        transcript_.Append(m);
        queue.push_back(std::move(m));
      }
    };
    post(std::move(initial));
    while (!queue.empty()) {
      Message m = std::move(queue.front());
      queue.pop_front();
      const ActorId to = m.receiver;
      Outbox out(to);
      actors_.at(static_cast<std::size_t>(to))->Handle(std::move(m), out);
      post(out.Take());
    }
  }
};

// One thread per actor, each with its own mailbox. The run ends when no
// message is queued or being handled.
class ThreadedNetwork final : public Network {
 public:
  using Network::Network;

  void Run(std::vector<Message> initial) override {
    const std::size_t n = actors_.size();
    mailboxes_ = std::vector<Mailbox>(n);
    Post(std::move(initial));
    std::vector<std::thread> threads;
    threads.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      threads.emplace_back([this, i] { Loop(i); });
    }
    {
      std::unique_lock lock(state_mu_);
      idle_cv_.wait(lock, [&] { return pending_ == 0 || error_; });
      stop_ = true;
    }
    for (auto& box : mailboxes_) {
      std::lock_guard lock(box.mu);
      box.cv.notify_all();
    }
    for (auto& t : threads) t.join();
    if (error_) std::rethrow_exception(error_);
  }

 private:
  struct Mailbox {
    std::mutex mu;
    std::condition_variable cv;
    std::deque<Message> queue;
  };

  void Post(std::vector<Message> batch) {
    {
      std::lock_guard lock(state_mu_);
      pending_ += batch.size();
      for (Message& m : batch) {
        m.seq = ++seq_;
        transcript_.Append(m);
      }
    }
    for (Message& m : batch) {
      Mailbox& box = mailboxes_.at(static_cast<std::size_t>(m.receiver));
      std::lock_guard lock(box.mu);
      box.queue.push_back(std::move(m));
      box.cv.notify_one();
    }
  }

  bool Stopped() {
    std::lock_guard lock(state_mu_);
    return stop_;
  }

  void Loop(std::size_t self) {
    Mailbox& box = mailboxes_[self];
    for (;;) {
      Message m;
      {
        std::unique_lock lock(box.mu);
        box.cv.wait(lock, [&] { return !box.queue.empty() || Stopped(); });
        if (box.queue.empty()) return;
        m = std::move(box.queue.front());
        box.queue.pop_front();
      }
      Outbox out(static_cast<ActorId>(self));
      try {
        actors_[self]->Handle(std::move(m), out);
        Post(out.Take());
      } catch (...) {
        std::lock_guard lock(state_mu_);
        if (!error_) error_ = std::current_exception();
      }
      std::lock_guard lock(state_mu_);
      if (--pending_ == 0 || error_) idle_cv_.notify_all();
    }
  }

  std::vector<Mailbox> mailboxes_;
  std::mutex state_mu_;
  std::condition_variable idle_cv_;
  std::size_t pending_ = 0;
  std::uint64_t seq_ = 0;
  bool stop_ = false;
  std::exception_ptr error_;
};

}  // namespace

std::vector<int> CountNoiseAdditions(const ProtocolTranscript& transcript,
                                     std::size_t coefficient_count) {
  std::vector<int> counts(coefficient_count, 0);
  for (const auto& e : transcript.entries()) {
    const Message& m = e.message;
    if ((m.tag == MessageTag::kSingleCoeff ||
         m.tag == MessageTag::kCrossCoeff) &&
        m.noised && m.coeff < coefficient_count) {
      ++counts[m.coeff];
    }
  }
  return counts;
}

ProtocolResult RunProtocol(const Dataset& data,
                           const VerticalPartition& partition,
                           const PrivacyBudget& budget,
                           const ProtocolOptions& options) {
  if (partition.dim() != data.dim()) {
    throw InputError("partition covers " + std::to_string(partition.dim()) +
                     " features but the dataset has " +
                     std::to_string(data.dim()));
  }
  if (data.size() == 0) throw InputError("cannot train on an empty dataset");
  const CoefficientAllocation allocation = Dissect(data.task(), partition);
  TripleService triples(options.seed);
  const FixedPointCodec codec(options.fractional_bits);
  if (options.backend == SecureBackend::kSecretSharing) {
    codec.CheckProductTerms(static_cast<std::size_t>(data.size()));
  }
  const RunContext ctx{allocation, partition, budget, options,
                       codec,      data.size(), triples};

  ServerActor server(ctx);
  std::vector<std::unique_ptr<PartyActor>> parties;
  const Eigen::VectorXd label = LabelColumn(data.task(), data.labels());
  for (PartyId k = 1; k <= partition.num_parties(); ++k) {
    std::map<int, Eigen::VectorXd> columns;
    for (int a : partition.features(k)) columns[a] = data.features().col(a);
    std::optional<Eigen::VectorXd> own_label;
    if (k == partition.label_owner()) own_label = label;
    parties.push_back(std::make_unique<PartyActor>(
        k, ctx, std::move(columns), std::move(own_label)));
  }
  std::vector<Actor*> actors = {&server};
  for (auto& p : parties) actors.push_back(p.get());

  ProtocolTranscript transcript(options.retain_payloads);
  std::unique_ptr<Network> network;
  if (options.scheduler == SchedulerKind::kThreaded) {
    network = std::make_unique<ThreadedNetwork>(actors, transcript);
  } else {
    network = std::make_unique<DeterministicNetwork>(actors, transcript);
  }
  Outbox start(kServer);
  server.Start(start);
  network->Run(start.Take());

  if (!server.done()) {
    throw ProtocolError("protocol stalled before every coefficient arrived");
  }
  for (const auto& p : parties) {
    if (!p->weights()) throw ProtocolError("a party never received the model");
  }

  ProtocolResult result{
      Model{server.report().weights, data.task()},
      server.report(),
      server.objective(),
      allocation,
      std::move(transcript),
      {},
      server.secure_dots(),
      triples.Ledger(),
      server.warnings(),
  };
  result.noise_additions =
      CountNoiseAdditions(result.transcript, allocation.size());
  return result;
}

CentralizedResult CentralizedFunctionalMechanism(
    const Dataset& data, const VerticalPartition& partition,
    const PrivacyBudget& budget, std::uint64_t seed, NoiseMode noise_mode,
    double ridge_floor) {
  const CoefficientAllocation allocation = Dissect(data.task(), partition);
  CentralizedResult out;
  out.exact_objective = Aggregate(data);
  std::vector<double> coeffs = out.exact_objective.Flatten();
  for (PartyId k = 1; k <= partition.num_parties(); ++k) {
    std::vector<NoiseRequest> requests;
    for (std::size_t flat = 0; flat < allocation.size(); ++flat) {
      const AllocationEntry& e = allocation.at(flat);
      if (e.noise_adder == k) requests.push_back({flat, budget.NoiseScale(e)});
    }
    const std::vector<double> noise =
        DrawNoise(requests, k, noise_mode, seed);
    for (std::size_t i = 0; i < requests.size(); ++i) {
      if (allocation.at(requests[i].flat).perturbed) {
        coeffs[requests[i].flat] += noise[i];
      }
    }
  }
  out.noisy_objective = PolyObjective::Unflatten(coeffs, allocation.dim());
  out.solve = MinimizeDetailed(out.noisy_objective,
                               ridge_floor >= 0.0 ? ridge_floor
                                                  : DefaultRidgeFloor(data.size()));
  out.model = Model{out.solve.weights, data.task()};
  return out;
}

AuditReport AuditServerView(const ProtocolTranscript& transcript,
                            const Dataset& data,
                            const CoefficientAllocation& allocation,
                            int fractional_bits) {
  if (!transcript.retain_payloads()) {
    throw InputError("server-view audit needs a transcript with payloads");
  }
  const FixedPointCodec codec(fractional_bits);
  const Eigen::MatrixXd& x = data.features();
  const Eigen::VectorXd label_column = LabelColumn(data.task(), data.labels());

  // Every raw value as the party would encode it.
  std::unordered_set<std::int64_t> encoded;
  auto add = [&](double v) { encoded.insert(codec.EncodeRaw(v)); };
  for (Eigen::Index i = 0; i < x.size(); ++i) add(x.data()[i]);
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    add(data.labels()[i]);
    add(label_column[i]);
  }
  std::vector<std::pair<std::string, Eigen::VectorXd>> columns;
  for (Eigen::Index a = 0; a < x.cols(); ++a) {
    columns.emplace_back("feature " + std::to_string(a), x.col(a));
  }
  columns.emplace_back("label", data.labels());
  columns.emplace_back("label column", label_column);
  const std::vector<double> exact = Aggregate(data).Flatten();
  const int128 small = int128{1} << fractional_bits;

  AuditReport report;
  for (const auto& entry : transcript.entries()) {
    const Message& m = entry.message;
    if (m.receiver != kServer) continue;
    ++report.messages_checked;
    std::vector<AuditFinding>& sink =
        m.debug_audit ? report.debug_findings : report.findings;
    auto flag = [&](std::string reason) {
      sink.push_back({m.seq, m.tag, m.coeff, std::move(reason)});
    };

    std::size_t hits = 0;
    for (const FieldElement& e : m.elements) {
      const int128 c = e.Centered();
      if (c <= small && c >= -small &&
          encoded.count(static_cast<std::int64_t>(c)) > 0) {
        ++hits;
      }
    }
    if (hits > 0) {
      flag(std::to_string(hits) +
           " field elements equal encoded raw data values");
    }

    if (m.reals.size() > 1) {
      for (const auto& [name, col] : columns) {
        if (static_cast<Eigen::Index>(m.reals.size()) == col.size() &&
            std::equal(m.reals.begin(), m.reals.end(), col.data())) {
          flag("payload is the raw " + name);
        }
      }
    }

    if ((m.tag == MessageTag::kSingleCoeff ||
         m.tag == MessageTag::kCrossCoeff) &&
        m.reals.size() == 1 && m.coeff < allocation.size()) {
      const AllocationEntry& e = allocation.at(m.coeff);
      const double truth = exact[m.coeff];
      // Cross values pass through the fixed-point codec: each of the n
      // products may be off by up to 2^(1-f) before scaling.
      const double codec_slack =
          e.kind == CoeffKind::kCrossParty
              ? static_cast<double>(data.size()) *
                    std::ldexp(1.0, 1 - fractional_bits) *
                    std::abs(RecipeFor(allocation.task(), e.index).scale)
              : 0.0;
      if (IsDataDependent(allocation.task(), e.index) &&
          std::abs(m.reals[0] - truth) <=
              std::max(1e-9 * std::max(1.0, std::abs(truth)), codec_slack)) {
        flag("coefficient " + e.index.Name() +
             " equals its unperturbed value");
      }
    }
  }
  return report;
}

}  // namespace vfm
