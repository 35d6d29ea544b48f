#include "activecq/dataset.hpp"

#include "activecq/errors.hpp"

namespace activecq {

std::string to_string(TreatmentMode mode) {
    switch (mode) {
        case TreatmentMode::Binary: return "binary";
        case TreatmentMode::Discrete: return "discrete";
        case TreatmentMode::Continuous: return "continuous";
    }
    return "continuous";
}

TreatmentMode treatment_mode_from_string(const std::string& name) {
    if (name == "binary") return TreatmentMode::Binary;
    if (name == "discrete") return TreatmentMode::Discrete;
    if (name == "continuous") return TreatmentMode::Continuous;
    throw SchemaError("unknown treatment mode: " + name);
}

Eigen::Index Dataset::rows() const {
    if (a.size() > 0) return a.size();
    if (s.rows() > 0) return s.rows();
    if (z.rows() > 0) return z.rows();
    return y.size();
}

void Dataset::validate() const {
    const Eigen::Index n = rows();
    if (has_treatment() && a.size() != n) throw DimensionMismatchError("dataset: treatment rows");
    if (has_conditioning() && z.rows() != n)
        throw DimensionMismatchError("dataset: conditioning rows");
    if (has_adjustment() && s.rows() != n) throw DimensionMismatchError("dataset: adjustment rows");
    if (has_outcomes() && y.size() != n) throw DimensionMismatchError("dataset: outcome rows");
}

Dataset Dataset::select(const std::vector<Eigen::Index>& indices) const {
    Dataset out;
    out.meta = meta;
    const auto k = static_cast<Eigen::Index>(indices.size());
    if (has_treatment()) out.a.resize(k);
    if (has_conditioning()) out.z.resize(k, z.cols());
    if (has_adjustment()) out.s.resize(k, s.cols());
    if (has_outcomes()) out.y.resize(k);
    for (Eigen::Index r = 0; r < k; ++r) {
        const Eigen::Index i = indices[static_cast<std::size_t>(r)];
        if (i < 0 || i >= rows()) throw DimensionMismatchError("dataset select: index out of range");
        if (has_treatment()) out.a[r] = a[i];
        if (has_conditioning()) out.z.row(r) = z.row(i);
        if (has_adjustment()) out.s.row(r) = s.row(i);
        if (has_outcomes()) out.y[r] = y[i];
    }
    return out;
}

Dataset Dataset::row(Eigen::Index i) const { return select({i}); }

void Dataset::append(const Dataset& other) {
    if (has_treatment() != other.has_treatment() || has_conditioning() != other.has_conditioning() ||
        has_adjustment() != other.has_adjustment() || has_outcomes() != other.has_outcomes())
        throw DimensionMismatchError("dataset append: block layouts differ");
    const Eigen::Index n = rows();
    const Eigen::Index m = other.rows();
    if (has_treatment()) {
        a.conservativeResize(n + m);
        a.tail(m) = other.a;
    }
    if (has_conditioning()) {
        if (z.cols() != other.z.cols()) throw DimensionMismatchError("dataset append: z width");
        z.conservativeResize(n + m, Eigen::NoChange);
        z.bottomRows(m) = other.z;
    }
    if (has_adjustment()) {
        if (s.cols() != other.s.cols()) throw DimensionMismatchError("dataset append: s width");
        s.conservativeResize(n + m, Eigen::NoChange);
        s.bottomRows(m) = other.s;
    }
    if (has_outcomes()) {
        y.conservativeResize(n + m);
        y.tail(m) = other.y;
    }
}

Dataset fold_conditioning_into_adjustment(const Dataset& data, Eigen::Index keep_s_cols) {
    Dataset out;
    out.meta = data.meta;
    out.a = data.a;
    out.y = data.y;
    const Eigen::Index kept =
        keep_s_cols < 0 ? data.s.cols() : std::min<Eigen::Index>(keep_s_cols, data.s.cols());
    out.s.resize(data.rows(), data.z.cols() + kept);
    if (data.z.cols() > 0) out.s.leftCols(data.z.cols()) = data.z;
    if (kept > 0) out.s.rightCols(kept) = data.s.leftCols(kept);
    return out;
}

}  // namespace activecq
