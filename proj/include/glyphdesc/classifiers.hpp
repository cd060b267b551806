#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace gd {

enum class ClassifierKind : std::uint8_t { LR = 0, ANN = 1, SvmLinear = 2, SvmRbf = 3 };

inline constexpr std::array<ClassifierKind, 4> kAllClassifierKinds{ClassifierKind::LR, ClassifierKind::ANN,
                                                                   ClassifierKind::SvmLinear, ClassifierKind::SvmRbf};

/// Column titles: "LR", "ANN", "SVM (Linear)", "SVM (RBF)".
[[nodiscard]] std::string_view display_name(ClassifierKind kind) noexcept;
/// Short identifiers used in configs and CSV: "lr", "ann", "svm-linear", "svm-rbf".
[[nodiscard]] std::string_view to_string(ClassifierKind kind) noexcept;
[[nodiscard]] std::optional<ClassifierKind> parse_classifier_kind(std::string_view name);

/// Row-per-sample design matrix with labels in [0, K).
struct LabeledSet {
  Eigen::MatrixXd X;
  std::vector<int> y;
  int K = 0;

  LabeledSet() = default;
  LabeledSet(Eigen::MatrixXd x, std::vector<int> labels, int classes);

  [[nodiscard]] int size() const noexcept { return static_cast<int>(X.rows()); }
  [[nodiscard]] int dim() const noexcept { return static_cast<int>(X.cols()); }
  /// Throws InvalidArgument / BadLabel when the invariants do not hold.
  void validate() const;
};

/// Rows of a followed by rows of b.
[[nodiscard]] LabeledSet concat(const LabeledSet& a, const LabeledSet& b);

/// Per-dimension z-score. Dimensions with zero spread keep scale 1.
struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  [[nodiscard]] static Standardizer fit(const Eigen::MatrixXd& X);
  [[nodiscard]] Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
  [[nodiscard]] LabeledSet apply(const LabeledSet& s) const;
  [[nodiscard]] bool empty() const noexcept { return mean.size() == 0; }
};

struct Hyperparams {
  double lambda = 0.0;
  double C = 1.0;
  double gamma = 0.0;
  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

/// "lambda=0.1", "C=3", "C=3;gamma=0.01" depending on the classifier.
[[nodiscard]] std::string format_params(ClassifierKind kind, const Hyperparams& p);

struct ParamGrid {
  std::vector<double> lambda{0.01, 0.03, 0.1, 0.3, 1, 3, 10};
  std::vector<double> C{0.3, 1, 3, 10, 30};
  std::vector<double> gamma{0.001, 0.003, 0.01, 0.03, 0.1};

  /// Candidates for one classifier in tie-break order (ascending lambda, or C then gamma).
  [[nodiscard]] std::vector<Hyperparams> candidates(ClassifierKind kind) const;
};

/// Optimiser outcome shared by LR and ANN.
struct TrainInfo {
  int iterations = 0;
  bool converged = false;
  double final_loss = 0.0;
  std::vector<double> loss_history;  // loss after each accepted step, starting with the initial loss
};

struct GradientOptions {
  int max_iter = 2000;
  double grad_tol = 1e-5;
  /// Train in the row space of X when D > N. Produces the same iterates up to rounding.
  bool allow_reduction = true;
  bool keep_history = false;
};

struct LogRegModel {
  Eigen::MatrixXd W;  // K x (D+1), column 0 is the bias
  double lambda = 0.0;
  TrainInfo info;
};

inline constexpr int kAnnHidden = 25;
inline constexpr std::uint64_t kDefaultAnnSeed = 0x61726162ULL;

struct AnnModel {
  Eigen::MatrixXd W1;  // 25 x (D+1), column 0 is the bias
  Eigen::MatrixXd W2;  // K x 26, column 0 is the bias
  double lambda = 0.0;
  TrainInfo info;
};

enum class SvmKernel : std::uint8_t { Linear = 0, Rbf = 1 };

struct SvmOptions {
  double tol = 1e-3;
  long max_updates = 100000;
};

/// One-vs-rest binary problem, expressed over the model's pooled support vectors.
struct BinarySvm {
  Eigen::VectorXd coef;  // alpha_i * y_i per pooled support vector (zero when unused)
  double b = 0.0;
  long updates = 0;
  bool converged = true;
  double kkt_gap = 0.0;
};

struct SvmModel {
  SvmKernel kernel = SvmKernel::Linear;
  double C = 1.0;
  double gamma = 0.0;
  Eigen::MatrixXd support;  // pooled support vectors, one per row
  std::vector<int> support_index;  // their rows in the training set
  std::vector<BinarySvm> machines;
  [[nodiscard]] bool converged() const noexcept;
};

/// Solution of a single binary dual, exposed for testing the solver directly.
struct SmoResult {
  Eigen::VectorXd alpha;
  double b = 0.0;
  long updates = 0;
  bool converged = false;
  double kkt_gap = 0.0;  // max violating-pair gap at return
};

/// Binary SMO on a precomputed kernel matrix; labels are +1 / -1.
[[nodiscard]] SmoResult smo_solve(const Eigen::MatrixXd& kernel, const std::vector<int>& y, double C,
                                  const SvmOptions& opt = {});
/// sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij.
[[nodiscard]] double svm_dual_objective(const Eigen::MatrixXd& kernel, const std::vector<int>& y,
                                        const Eigen::VectorXd& alpha);

[[nodiscard]] Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, SvmKernel kernel,
                                            double gamma);
[[nodiscard]] double rbf_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double gamma);

/// Cached products of one training set that every fit on it can share:
/// the Gram matrix (when needed) and the row-space basis for D > N.
class FitContext {
 public:
  explicit FitContext(const LabeledSet& train);
  ~FitContext();
  FitContext(const FitContext&) = delete;
  FitContext& operator=(const FitContext&) = delete;

  [[nodiscard]] const LabeledSet& set() const noexcept { return set_; }
  [[nodiscard]] const Eigen::MatrixXd& gram() const;
  [[nodiscard]] const Eigen::VectorXd& squared_norms() const;

  struct RowSpace {
    Eigen::MatrixXd Z;  // N x r coordinates, X = Z V^T
    Eigen::MatrixXd V;  // D x r orthonormal basis
  };
  /// Row-space factorisation; nullptr when D <= N.
  [[nodiscard]] const RowSpace* row_space() const;

 private:
  const LabeledSet& set_;
  mutable std::unique_ptr<Eigen::MatrixXd> gram_;
  mutable std::unique_ptr<Eigen::VectorXd> norms_;
  mutable std::unique_ptr<RowSpace> rows_;
  mutable bool rows_done_ = false;
};

[[nodiscard]] LogRegModel train_logreg(const LabeledSet& train, double lambda, const GradientOptions& opt = {});
[[nodiscard]] LogRegModel train_logreg(const FitContext& ctx, double lambda, const GradientOptions& opt = {});

[[nodiscard]] AnnModel train_ann(const LabeledSet& train, double lambda, std::uint64_t seed = kDefaultAnnSeed,
                                 const GradientOptions& opt = {});
[[nodiscard]] AnnModel train_ann(const FitContext& ctx, double lambda, std::uint64_t seed = kDefaultAnnSeed,
                                 const GradientOptions& opt = {});
/// Glorot-uniform starting weights as used by train_ann.
[[nodiscard]] AnnModel ann_initial_weights(int D, int K, std::uint64_t seed);

[[nodiscard]] SvmModel train_svm(const LabeledSet& train, SvmKernel kernel, double C, std::optional<double> gamma = {},
                                 const SvmOptions& opt = {});
[[nodiscard]] SvmModel train_svm(const FitContext& ctx, SvmKernel kernel, double C, std::optional<double> gamma = {},
                                 const SvmOptions& opt = {});

/// Regularised objectives in the full parameter space (for gradient checks).
/// grad, when given, receives the gradient with the same shape as the weights.
[[nodiscard]] double logreg_objective(const LabeledSet& s, const Eigen::MatrixXd& W, double lambda,
                                      Eigen::MatrixXd* grad = nullptr);
[[nodiscard]] double ann_objective(const LabeledSet& s, const AnnModel& m, double lambda, AnnModel* grad = nullptr);

using Model = std::variant<LogRegModel, AnnModel, SvmModel>;

[[nodiscard]] ClassifierKind model_kind(const Model& m) noexcept;
[[nodiscard]] int model_dim(const Model& m) noexcept;
[[nodiscard]] int model_classes(const Model& m) noexcept;

/// Per-class scores, one row per sample: probabilities for LR/ANN, decision values for SVM.
[[nodiscard]] Eigen::MatrixXd class_scores(const Model& m, const Eigen::MatrixXd& X);
/// Row argmax; ties go to the lowest class index.
[[nodiscard]] std::vector<int> argmax_rows(const Eigen::MatrixXd& scores);
[[nodiscard]] std::vector<int> predict(const Model& m, const Eigen::MatrixXd& X);
[[nodiscard]] int predict_one(const Model& m, const Eigen::VectorXd& x);

[[nodiscard]] Model train(const FitContext& ctx, ClassifierKind kind, const Hyperparams& p);
[[nodiscard]] Model train(const LabeledSet& train, ClassifierKind kind, const Hyperparams& p);

/// Percent of matching entries; 0 for empty inputs.
[[nodiscard]] double accuracy_percent(const std::vector<int>& predicted, const std::vector<int>& truth);

/// A model together with the scaling it expects on raw descriptors.
struct Pipeline {
  Standardizer scaler;
  Model model;
  [[nodiscard]] std::vector<int> predict(const Eigen::MatrixXd& raw) const;
};

struct GridPoint {
  Hyperparams params;
  double val_accuracy = 0.0;
};

struct GridResult {
  Hyperparams best;
  double val_accuracy = 0.0;
  std::vector<GridPoint> evaluated;
};

/// Standardises on train, fits every candidate, scores on val. Highest
/// validation accuracy wins; ties keep the earlier candidate in tie-break order.
[[nodiscard]] GridResult grid_search(const LabeledSet& train, const LabeledSet& val, ClassifierKind kind,
                                     const ParamGrid& grid);

struct RefitResult {
  double accuracy = 0.0;  // percent
  std::vector<int> predictions;
  Pipeline pipeline;
};

/// Refits on train + val (with a fresh standardiser) and evaluates on test.
[[nodiscard]] RefitResult refit_and_test(const LabeledSet& train, const LabeledSet& val, const LabeledSet& test,
                                         ClassifierKind kind, const Hyperparams& params);

/// Binary "GDM1" container, little-endian.
void save_pipeline(const Pipeline& p, std::ostream& out);
[[nodiscard]] Pipeline load_pipeline(std::istream& in);
void save_pipeline(const Pipeline& p, const std::string& path);
[[nodiscard]] Pipeline load_pipeline(const std::string& path);

}  // namespace gd
