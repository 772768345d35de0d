/* dsh/presentation.hpp — diagonal subhomogeneous presentations over finite
 * sampled base spaces, and the elements (matrix-valued functions) they carry.
 *
 * A presentation is a list of levels. Level i holds a finite sampled metric
 * space X_i (points with coordinates), a matrix size n_i, a distinguished
 * subset Y_i, and for each y in Y_i an ordered decomposition into sources
 * ((i_1, x_1), ..., (i_t, x_t)) at strictly earlier levels with
 * n_{i_1} + ... + n_{i_t} = n_i.  An element f assigns to each point of X_i
 * an n_i x n_i matrix, subject to the block-diagonal constraint
 *
 *   f_i(y) = diag(f_{i_1}(x_1), ..., f_{i_t}(x_t))   for every y in Y_i.
 *
 * The free points X_i \ Y_i are the spectrum; values at Y points are
 * determined by the constraint (derive_element makes them exact by
 * construction).  Presentations and elements are immutable after
 * construction and all operations here are pure.
 */
#pragma once

#include "dsh/matrix.hpp"
#include "dsh/tolerances.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace dsh {

/// @brief A sampled base-space point: an identifier plus coordinates.
struct Point {
    std::string id;
    std::vector<double> coord;
};

/// @brief Distance between sampled points: wrap-around distance on the unit
/// circle for 1-D coordinates, Euclidean otherwise.
double point_distance(const Point& a, const Point& b);

/// @brief One entry of a decomposition: a point at an earlier level.
struct Source {
    int level = 0;            // 1-based level index
    std::string point;        // id within that level
};

/// @brief One level of a presentation.
struct Level {
    int n = 0;                              // matrix size n_i
    std::vector<Point> points;              // the sampled space X_i, ordered
    std::vector<std::string> y_ids;         // Y_i as ids into points, ordered
    std::map<std::string, std::vector<Source>> decomp;  // y id -> sources
};

/// @brief An immutable diagonal subhomogeneous presentation.
class Presentation {
public:
    explicit Presentation(std::vector<Level> levels);

    int num_levels() const { return static_cast<int>(levels_.size()); }
    const Level& level(int i) const;                       // 1-based
    const std::vector<Level>& levels() const { return levels_; }

    int size_at(int i) const { return level(i).n; }
    /// @brief Smallest matrix size over all levels.
    int min_size() const;
    /// @brief Largest matrix size over all levels.
    int max_size() const;

    bool has_point(int i, const std::string& id) const;
    /// @brief 0-based position of a point id within level i; errors if absent.
    int point_pos(int i, const std::string& id) const;
    const Point& point(int i, int pos) const;
    bool is_y(int i, const std::string& id) const;
    bool is_y_pos(int i, int pos) const;
    const std::vector<Source>& sources(int i, const std::string& y_id) const;

    /// @brief 1-based diagonal start indices of y's decomposition blocks;
    /// {1} for a free point.
    std::vector<int> block_starts(int i, const std::string& id) const;

    /// @brief Structural scan; returns human-readable violations, empty iff valid.
    std::vector<std::string> validate() const;
    /// @brief Throws the first violation as an Error (code from caller).
    void require_valid(const char* module, const char* operation) const;

    /// @brief Position of the nearest non-Y point of level i to the point at
    /// pos (excluding itself); nullopt if the level has no other free point.
    std::optional<int> nearest_free_point(int i, int pos) const;

private:
    std::vector<Level> levels_;
    std::vector<std::unordered_map<std::string, int>> pos_;   // id -> position
    std::vector<std::vector<char>> y_flag_;                   // by position
};

using PresentationPtr = std::shared_ptr<const Presentation>;

/// @brief Deep structural equality (levels, points, coordinates, decompositions).
bool same_presentation(const Presentation& a, const Presentation& b);

/// @brief A labeled spectrum point (level index + point id).
struct SpectrumPoint {
    int level = 0;
    std::string point;
};

/// @brief The disjoint union of the free parts X_i \ Y_i, in level then point order.
std::vector<SpectrumPoint> enumerate_spectrum(const Presentation& p);

/// @brief Points of X_i with a decomposition block starting at diagonal index k.
///
/// k <= 0 yields the empty set; k == 1 yields all of X_i (every point's first
/// block starts at 1); k >= 2 yields a subset of Y_i.
std::vector<std::string> compute_bik(const Presentation& p, int i, int k);

/// @brief True iff no point of u (a set of free level-i points) is used as a
/// decomposition source at any later level.  Errors if u meets Y_i or leaves X_i.
bool is_open_in_spectrum(const Presentation& p, int i,
                         const std::vector<std::string>& u);

/// @brief An immutable element: one matrix per point, stored level-by-level
/// in point order over a shared presentation.
class Element {
public:
    Element(PresentationPtr pres, std::vector<std::vector<Mat>> values);

    const Presentation& pres() const { return *pres_; }
    const PresentationPtr& pres_ptr() const { return pres_; }

    const Mat& at(int i, int pos) const;                    // 0-based pos
    const Mat& value(int i, const std::string& id) const;
    const std::vector<std::vector<Mat>>& values() const { return values_; }

    /// @brief Copy with one point's value replaced (constraints not re-derived).
    Element with_value(int i, int pos, Mat m) const;

private:
    PresentationPtr pres_;
    std::vector<std::vector<Mat>> values_;
};

/// @brief Map from (level, point id) to the free value there.
using FreeValueMap = std::map<std::pair<int, std::string>, Mat>;

/// @brief Builds an element from values at free points only; Y values are
/// assembled block-diagonally from the decompositions, exactly.
Element derive_element(PresentationPtr p, const FreeValueMap& free_values);

/// @brief Same, with values supplied by a callback over free points.
Element derive_element(PresentationPtr p,
                       const std::function<Mat(int, const Point&)>& free_fn);

/// @brief Largest entrywise deviation from the block-diagonal constraints
/// over all Y points; 0 for derived elements.
double element_deviation(const Element& f);

/// @brief Pointwise sum (same presentation required).
Element add(const Element& a, const Element& b);
/// @brief Pointwise difference.
Element subtract(const Element& a, const Element& b);
/// @brief Pointwise product.
Element multiply(const Element& a, const Element& b);
/// @brief Pointwise conjugate transpose.
Element adjoint(const Element& a);
/// @brief Scalar multiple.
Element scale(Cplx lambda, const Element& a);
/// @brief The unit element (identity at every point).
Element unit_element(PresentationPtr p);
/// @brief The zero element.
Element zero_element(PresentationPtr p);

inline Element operator+(const Element& a, const Element& b) { return add(a, b); }
inline Element operator-(const Element& a, const Element& b) { return subtract(a, b); }
inline Element operator*(const Element& a, const Element& b) { return multiply(a, b); }
inline Element operator*(Cplx lambda, const Element& a) { return scale(lambda, a); }
inline Element operator*(double lambda, const Element& a) { return scale(Cplx(lambda, 0.0), a); }

/// @brief Sup over all points of the operator norm of the value.
double element_norm(const Element& f);

/// @brief True iff every free evaluation has smallest singular value above
/// tol.tau_sing (Y evaluations are block-diagonal in these, so this decides
/// invertibility).
bool is_invertible_element(const Element& f, const Tolerances& tol);

/// @brief Pointwise inverse; errors if is_invertible_element fails.
Element invert_element(const Element& f, const Tolerances& tol);

} // namespace dsh
