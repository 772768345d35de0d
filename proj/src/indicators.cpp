/* indicators.cpp — block-start marker elements and their certificates. */
#include "dsh/indicators.hpp"

#include "dsh/errors.hpp"

#include <algorithm>
#include <set>

namespace dsh {

namespace {

/// Diagonal 0/1 marker at one point: ones at j = start + K_t for each block
/// start and each offset.
Mat marker_matrix(const Presentation& p, const IndicatorSpec& spec, int i,
                  const std::string& id) {
    const int n = p.size_at(i);
    Mat m = Mat::Zero(n, n);
    for (int start : p.block_starts(i, id)) {
        for (int k : spec.K) {
            const int j = start + k;
            require(j >= 1 && j <= n, "indicator.offset-overflow", "indicators",
                    "build_phi", "marked entries must stay inside the matrix",
                    "start " + std::to_string(start) + " + offset " +
                        std::to_string(k) + " leaves 1.." + std::to_string(n));
            m(j - 1, j - 1) = 1.0;
        }
    }
    return m;
}

void require_spec(const Presentation& p, const IndicatorSpec& spec,
                  const char* operation, bool with_f) {
    p.require_valid("indicators", operation);
    std::vector<std::string> report = validate_indicator_spec(p, spec);
    if (!with_f) {
        // build_phi ignores forbidden sets, so their violations do not block it.
        std::erase_if(report, [](const std::string& v) {
            return v.rfind("forbidden", 0) == 0;
        });
    }
    if (!report.empty()) {
        throw Error("indicator.bad-spec", "indicators", operation,
                    "the spec must satisfy the offset and gap constraints",
                    std::to_string(report.size()) + " violation(s); first: " +
                        report.front());
    }
}

} // namespace

std::vector<std::string> validate_indicator_spec(const Presentation& p,
                                                 const IndicatorSpec& spec) {
    std::vector<std::string> report;
    auto note = [&report](const std::string& msg) { report.push_back(msg); };
    if (spec.M < 1) note("gap width must be positive, got " + std::to_string(spec.M));
    if (spec.K.empty()) note("offset list is empty");
    const int s = p.min_size();
    for (size_t t = 0; t < spec.K.size(); ++t) {
        if (t == 0 && spec.K[t] < 0)
            note("first offset must be nonnegative, got " + std::to_string(spec.K[t]));
        if (t > 0 && spec.K[t] - spec.K[t - 1] < spec.M)
            note("offsets " + std::to_string(spec.K[t - 1]) + " and " +
                 std::to_string(spec.K[t]) + " are closer than the gap width " +
                 std::to_string(spec.M));
    }
    if (!spec.K.empty() && spec.K.back() >= s - spec.M)
        note("last offset " + std::to_string(spec.K.back()) +
             " must stay below min size - gap width = " + std::to_string(s - spec.M));
    for (const auto& [key, ids] : spec.F) {
        const auto [i, j] = key;
        const std::string at =
            "forbidden set at level " + std::to_string(i) + ", index " + std::to_string(j);
        if (i < 1 || i > p.num_levels()) {
            note(at + ": no such level");
            continue;
        }
        if (j < 1 || j > p.size_at(i)) {
            note(at + ": index outside 1.." + std::to_string(p.size_at(i)));
            continue;
        }
        std::set<std::string> f_set;
        for (const std::string& id : ids) {
            if (!p.has_point(i, id)) {
                note(at + ": unknown point '" + id + "'");
                continue;
            }
            f_set.insert(id);
        }
        // Forbidding an entry the marker would set is contradictory.
        for (int k : spec.K) {
            for (const std::string& b : compute_bik(p, i, j - k)) {
                if (f_set.count(b))
                    note(at + ": point '" + b + "' has a block start at index " +
                         std::to_string(j - k));
            }
        }
    }
    return report;
}

Element build_phi(PresentationPtr p, const IndicatorSpec& spec) {
    require(p != nullptr, "indicator.null-presentation", "indicators",
            "build_phi", "a presentation is required", "got null");
    require_spec(*p, spec, "build_phi", /*with_f=*/false);
    return derive_element(p, [&p, &spec](int i, const Point& pt) -> Mat {
        return marker_matrix(*p, spec, i, pt.id);
    });
}

ThetaResult build_theta(PresentationPtr p, const IndicatorSpec& spec) {
    require(p != nullptr, "indicator.null-presentation", "indicators",
            "build_theta", "a presentation is required", "got null");
    require_spec(*p, spec, "build_theta", /*with_f=*/true);
    Element phi = build_phi(p, spec);

    // Ramp the marker below the largest value it takes on a forbidden point.
    // The 0/1 marker vanishes on every forbidden set already (that is the
    // disjointness constraint), so delta is 0 and the ramp is the identity on
    // {0, 1}; it is kept explicit so the certificates below stay honest
    // against any conforming replacement of marker_matrix.
    double delta = 0.0;
    for (const auto& [key, ids] : spec.F) {
        const auto [i, j] = key;
        for (const std::string& id : ids) {
            delta = std::max(delta, phi.value(i, id)(j - 1, j - 1).real());
        }
    }
    delta = std::min(delta, 1.0 - 1e-6);
    const auto ramp = [delta](double x) -> double {
        const double mid = (1.0 + delta) / 2.0;
        if (x <= delta) return 0.0;
        if (x >= mid) return 1.0;
        return (x - delta) / (mid - delta);
    };
    Element theta = derive_element(p, [&phi, &ramp](int i, const Point& pt) -> Mat {
        Mat m = phi.value(i, pt.id);
        for (int j = 0; j < m.rows(); ++j) {
            m(j, j) = Cplx(ramp(m(j, j).real()), 0.0);
        }
        return m;
    });

    ThetaResult out{std::move(theta), {}};
    for (int i = 1; i <= p->num_levels(); ++i) {
        for (int j = 1; j <= p->size_at(i); ++j) {
            std::vector<std::string> b = compute_bik(*p, i, j);
            if (!b.empty()) out.certificates[{i, j}] = std::move(b);
        }
    }
    return out;
}

} // namespace dsh
