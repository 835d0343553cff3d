#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nsbench/rng.hpp"
#include "nsbench/rules.hpp"
#include "nsbench/scene.hpp"

namespace nsb {

// Common fit/predict contract for the four engines. Labels are parallel to
// scenes; fitted models are immutable and safe to share.
class Reasoner {
public:
    virtual ~Reasoner() = default;
    virtual std::string name() const = 0;
    virtual void fit(const std::vector<const GroundedScene*>& scenes,
                     const std::vector<char>& labels) = 0;
    virtual bool predict(const GroundedScene& scene) const = 0;
    virtual std::string serialize() const = 0; // JSON
    virtual long iterations() const { return 0; }
};

std::unique_ptr<Reasoner> make_reasoner(const std::string& engine, const AttributeSchema& schema,
                                        std::uint64_t seed);
const std::vector<std::string>& engine_names();

// ---------------------------------------------------------------------------
// ILP: generate-test-constrain over a bounded clause language.

struct IlpOptions {
    int budget = 20000;       // tested candidates
    int max_vars = 2;         // variables per clause
    int max_literals = 4;     // attribute literals per variable
    int max_clauses = 2;      // disjuncts per hypothesis
    // Include left_of/front_of body literals. Off by default: the benchmark
    // rules are attribute-only and spatial literals triple the search space.
    bool allow_relations = false;
};

// One clause: a conjunction of attribute literals on up to two existentially
// quantified variables, optionally joined by a spatial relation literal.
struct IlpClause {
    std::vector<std::pair<int, int>> a; // (concept, value), sorted
    std::vector<std::pair<int, int>> b;
    int relation = -1; // -1 none, else relation index (left_of=0, front_of=1)

    int size() const { return static_cast<int>(a.size() + b.size()) + (relation >= 0 ? 1 : 0); }
    int num_vars() const { return (b.empty() && relation < 0) ? 1 : 2; }
    bool operator==(const IlpClause&) const = default;
};

struct Hypothesis {
    std::vector<IlpClause> clauses; // OR across clauses
    long iterations_used = 0;

    int size() const;
};

class IlpReasoner : public Reasoner {
public:
    IlpReasoner(const AttributeSchema& schema, IlpOptions options = {});

    std::string name() const override { return "ilp"; }
    void fit(const std::vector<const GroundedScene*>& scenes,
             const std::vector<char>& labels) override;
    bool predict(const GroundedScene& scene) const override;
    std::string serialize() const override;
    long iterations() const override { return iterations_used_; }

    bool failed() const { return !hypothesis_.has_value(); }
    const Hypothesis& hypothesis() const; // throws if failed
    std::string hypothesis_text() const;  // rule expression, or "FAILURE"
    std::string hypothesis_prolog() const;

private:
    const AttributeSchema& schema_;
    IlpOptions options_;
    std::optional<Hypothesis> hypothesis_;
    long iterations_used_ = 0;
};

// ---------------------------------------------------------------------------
// Decision tree: CART with Gini impurity on bag-of-properties counts.

struct DtOptions {
    int max_depth = 8;
    int min_leaf = 2;
};

class DtReasoner : public Reasoner {
public:
    // threshold splits are "feature <= t"; internal nodes index into nodes_
    struct Node {
        int feature = -1;
        int threshold = 0;
        int left = -1;
        int right = -1;
        bool prediction = false; // leaves only
        bool is_leaf() const { return feature < 0; }
    };

    DtReasoner(const AttributeSchema& schema, DtOptions options = {});

    std::string name() const override { return "dt"; }
    void fit(const std::vector<const GroundedScene*>& scenes,
             const std::vector<char>& labels) override;
    bool predict(const GroundedScene& scene) const override;
    bool predict_vector(const std::vector<int>& features) const;
    std::string serialize() const override;

    const std::vector<Node>& nodes() const { return nodes_; }

private:
    int build(std::vector<int>& rows, const std::vector<std::vector<int>>& x,
              const std::vector<char>& y, int depth);

    const AttributeSchema& schema_;
    DtOptions options_;
    int width_ = 0;
    std::vector<Node> nodes_; // nodes_[0] is the root after fit
};

// ---------------------------------------------------------------------------
// Naive Bayes over clipped bag-of-properties counts.

struct BnOptions {
    int count_cap = 4;   // counts clipped to [0, cap]
    double alpha = 1.0;  // Laplace smoothing
};

class BnReasoner : public Reasoner {
public:
    BnReasoner(const AttributeSchema& schema, BnOptions options = {});

    std::string name() const override { return "bn"; }
    void fit(const std::vector<const GroundedScene*>& scenes,
             const std::vector<char>& labels) override;
    bool predict(const GroundedScene& scene) const override;
    std::string serialize() const override;

    // log P(class) + sum of log P(feature bucket | class)
    double log_posterior(const std::vector<int>& features, bool positive) const;
    double feature_log_prob(int feature, int bucket, bool positive) const;

private:
    const AttributeSchema& schema_;
    BnOptions options_;
    int width_ = 0;
    double log_prior_[2] = {0.0, 0.0};
    // [class][feature][bucket] -> log probability
    std::vector<std::vector<double>> log_prob_[2];
};

// ---------------------------------------------------------------------------
// DeepSets set classifier with hand-derived gradients.

struct NsclOptions {
    int hidden = 64;
    int epochs = 60;
    int batch_size = 64;
    double lr = 0.05;
    double early_stop_loss = 1e-3;
};

class NsclReasoner : public Reasoner {
public:
    NsclReasoner(const AttributeSchema& schema, std::uint64_t seed, NsclOptions options = {});

    std::string name() const override { return "nscl"; }
    void fit(const std::vector<const GroundedScene*>& scenes,
             const std::vector<char>& labels) override;
    bool predict(const GroundedScene& scene) const override;
    std::string serialize() const override;

    // per-object input: one-hot attribute values then coordinates
    std::vector<std::vector<double>> encode(const GroundedScene& scene) const;
    double logit(const GroundedScene& scene) const;
    double probability(const GroundedScene& scene) const;

    // mean BCE over the batch and its gradient; exposed for gradient checks
    double loss_and_grad(const std::vector<std::vector<std::vector<double>>>& batch,
                         const std::vector<char>& labels, std::vector<double>* grad) const;
    std::vector<double>& parameters() { return params_; }
    const std::vector<double>& parameters() const { return params_; }
    int input_width() const { return input_width_; }

private:
    double forward(const std::vector<std::vector<double>>& objects,
                   std::vector<double>* workspace) const;

    const AttributeSchema& schema_;
    NsclOptions options_;
    std::uint64_t seed_;
    int input_width_ = 0;
    std::vector<double> params_;
};

} // namespace nsb
