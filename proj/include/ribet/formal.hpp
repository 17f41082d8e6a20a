#pragma once

// The formal-variables machinery: for a choice of r relation rows, builds
// the polynomial ring R = Z[row-entry vars, a_i, b_i, c_i, d_i], the generic
// matrices rho_i, the relation ideal J (all four coefficients of the defining
// expression per row) and its b-coefficient subideal J', the relation matrix
// D, the altered matrix D', and e = det(D') - det(D).  Verifies the
// structural statements: e lies in the ideal of conjugation-acted variables,
// D'.(b_1..b_r)^T matches the J' generators up to sign, J and J' are stable
// under the lower Borel, e is Borel-invariant mod J', and e splits as
// (trace/determinant expression) + (element of J) with an explicitly
// verified certificate.

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

#include "ribet/groebner.hpp"
#include "ribet/matrix.hpp"
#include "ribet/poly.hpp"
#include "ribet/rings.hpp"

namespace ribet::formal {

using matrices::Mat2;
using matrices::Matrix;
using mpoly::Monomial;
using mpoly::MonomialOrder;
using mpoly::OrderPtr;
using mpoly::Poly;
using mpoly::VarClass;
using mpoly::VarInfo;
using mpoly::VarTable;
using mpoly::VarTablePtr;

struct RowSpec {
    enum class Kind { Eps, Delta };
    Kind kind = Kind::Eps;
    int i = 0, j = 0;  // 1-based, Delta only

    static RowSpec eps() { return RowSpec{}; }
    static RowSpec delta(int i, int j) { return RowSpec{Kind::Delta, i, j}; }

    bool operator==(const RowSpec& o) const { return kind == o.kind && i == o.i && j == o.j; }
    bool operator<(const RowSpec& o) const {
        if (kind != o.kind) return kind < o.kind;
        if (i != o.i) return i < o.i;
        return j < o.j;
    }
    std::string to_string() const {
        if (kind == Kind::Eps) return "eps";
        return "delta(" + std::to_string(i) + "," + std::to_string(j) + ")";
    }
};

using IPoly = Poly<Int>;
using QPoly = Poly<Rat>;

struct FormalContext {
    int r = 0;
    std::vector<RowSpec> rows;
    VarTablePtr table;
    OrderPtr order;
    std::vector<Mat2<IPoly>> rho;                 // generic 2x2 matrices
    std::vector<std::array<IPoly, 4>> row_coeffs; // per row: a,b,c,d coefficients of the defining expression
    std::vector<IPoly> J;                         // 4 per row, in (a,b,c,d) order
    std::vector<IPoly> Jprime;                    // b-coefficient per row
    Matrix<IPoly> D, Dprime;
    IPoly e;                                      // det(D') - det(D)
    std::vector<std::vector<int>> entry_var;      // [row][k-1]: table index of the D entry variable

    IPoly var(int index) const { return IPoly::variable(table, order, index, Int(1)); }
    IPoly abcd(VarClass cls, int i) const {
        int idx = table->index_of(cls, i);
        if (idx < 0) throw std::logic_error("missing a/b/c/d variable");
        return var(idx);
    }
};

/// Row-entry variables: the base ring carries one free variable per entry
/// of D, so each row owns its own family.  Names collapse to eps<k> / delta<i><j><k>
/// when the row spec occurs once; repeated specs get a _r<row> suffix.
inline FormalContext build_context(int r, std::vector<RowSpec> rows, int r_cap = 4) {
    if (r < 1 || r > r_cap)
        throw std::invalid_argument("build_context: r out of range (cap " + std::to_string(r_cap) + ")");
    if (static_cast<int>(rows.size()) != r)
        throw std::invalid_argument("build_context: exactly r rows required");
    for (const auto& row : rows)
        if (row.kind == RowSpec::Kind::Delta && (row.i < 1 || row.i > r || row.j < 1 || row.j > r))
            throw std::invalid_argument("build_context: row index out of range");

    FormalContext ctx;
    ctx.r = r;
    ctx.rows = rows;

    std::map<RowSpec, int> multiplicity;
    for (const auto& row : rows) multiplicity[row]++;

    std::vector<VarInfo> infos;
    const char* names = "abcd";
    VarClass classes[4] = {VarClass::A, VarClass::B, VarClass::C, VarClass::D};
    for (int c = 0; c < 4; ++c)
        for (int i = 1; i <= r; ++i)
            infos.push_back(VarInfo{std::string(1, names[c]) + std::to_string(i), classes[c], i, 0, 0, 0});
    std::vector<std::vector<int>> entry_var(rows.size(), std::vector<int>(r, -1));
    for (size_t l = 0; l < rows.size(); ++l) {
        const RowSpec& row = rows[l];
        bool unique = multiplicity[row] == 1;
        std::string suffix = unique ? "" : "_r" + std::to_string(l + 1);
        for (int k = 1; k <= r; ++k) {
            VarInfo vi;
            vi.row = static_cast<int>(l + 1);
            if (row.kind == RowSpec::Kind::Eps) {
                vi.name = "eps" + std::to_string(k) + suffix;
                vi.cls = VarClass::Eps;
                vi.i = k;
            } else {
                vi.name = "delta" + std::to_string(row.i) + std::to_string(row.j) + std::to_string(k) + suffix;
                vi.cls = VarClass::Delta;
                vi.i = row.i;
                vi.j = row.j;
                vi.k = k;
            }
            entry_var[l][k - 1] = static_cast<int>(infos.size());
            infos.push_back(std::move(vi));
        }
    }
    ctx.table = VarTable::from_infos(infos);
    ctx.order = MonomialOrder::blocked(ctx.table);
    ctx.entry_var = std::move(entry_var);

    for (int i = 1; i <= r; ++i)
        ctx.rho.push_back(Mat2<IPoly>(ctx.abcd(VarClass::A, i), ctx.abcd(VarClass::B, i), ctx.abcd(VarClass::C, i),
                                      ctx.abcd(VarClass::D, i)));

    auto zero = IPoly::zero(ctx.table, ctx.order);
    for (size_t l = 0; l < rows.size(); ++l) {
        Mat2<IPoly> expr = Mat2<IPoly>(zero, zero, zero, zero);
        if (rows[l].kind == RowSpec::Kind::Delta) expr = ctx.rho[rows[l].i - 1] * ctx.rho[rows[l].j - 1];
        for (int k = 1; k <= r; ++k) {
            IPoly v = ctx.var(ctx.entry_var[l][k - 1]);
            Mat2<IPoly> scaled = ctx.rho[k - 1].scaled(v);
            expr = rows[l].kind == RowSpec::Kind::Delta ? expr - scaled : expr + scaled;
        }
        ctx.row_coeffs.push_back({expr.a, expr.b, expr.c, expr.d});
        ctx.J.push_back(expr.a);
        ctx.J.push_back(expr.b);
        ctx.J.push_back(expr.c);
        ctx.J.push_back(expr.d);
        ctx.Jprime.push_back(expr.b);
    }

    ctx.D = Matrix<IPoly>(rows.size(), static_cast<size_t>(r), zero);
    for (size_t l = 0; l < rows.size(); ++l)
        for (int k = 1; k <= r; ++k) ctx.D.at(l, static_cast<size_t>(k - 1)) = ctx.var(ctx.entry_var[l][k - 1]);
    ctx.Dprime = ctx.D;
    for (size_t l = 0; l < rows.size(); ++l) {
        const RowSpec& row = rows[l];
        if (row.kind != RowSpec::Kind::Delta) continue;
        // delta_ijj -> delta_ijj - a_i and delta_iji -> delta_iji - d_j
        // (cumulative when i == j)
        auto& at_j = ctx.Dprime.at(l, static_cast<size_t>(row.j - 1));
        at_j = at_j - ctx.abcd(VarClass::A, row.i);
        auto& at_i = ctx.Dprime.at(l, static_cast<size_t>(row.i - 1));
        at_i = at_i - ctx.abcd(VarClass::D, row.j);
    }
    ctx.e = matrices::det_n(ctx.Dprime) - matrices::det_n(ctx.D);
    return ctx;
}

/// All row multisets of size r over {Eps} u {Delta(i,j)}, deterministically
/// ordered; the exhaustive family behind the structural acceptance sweeps.
inline std::vector<std::vector<RowSpec>> all_row_multisets(int r) {
    std::vector<RowSpec> types{RowSpec::eps()};
    for (int i = 1; i <= r; ++i)
        for (int j = 1; j <= r; ++j) types.push_back(RowSpec::delta(i, j));
    std::vector<std::vector<RowSpec>> out;
    std::vector<size_t> pick(static_cast<size_t>(r), 0);
    std::function<void(size_t, size_t)> rec = [&](size_t pos, size_t start) {
        if (pos == pick.size()) {
            std::vector<RowSpec> rows;
            for (size_t t : pick) rows.push_back(types[t]);
            out.push_back(std::move(rows));
            return;
        }
        for (size_t t = start; t < types.size(); ++t) {
            pick[pos] = t;
            rec(pos + 1, t);
        }
    };
    rec(0, 0);
    return out;
}

// ---- structural checks -------------------------------------------------------

/// Membership in I_R = <a_i, b_i, c_i, d_i>: every monomial must contain a
/// conjugation-acted variable.
inline bool poly_in_IR(const IPoly& f) {
    for (const auto& [m, c] : f.terms()) {
        int acted = 0;
        for (size_t v = 0; v < f.table()->size(); ++v) {
            VarClass cls = f.table()->info(v).cls;
            if (cls == VarClass::A || cls == VarClass::B || cls == VarClass::C || cls == VarClass::D)
                acted += m.e[v];
        }
        if (acted == 0) return false;
    }
    return true;
}

inline bool check_e_in_IR(const FormalContext& ctx) { return poly_in_IR(ctx.e); }

/// D'.(b_1..b_r)^T componentwise: +J'[l] for eps rows, -J'[l] for delta rows.
inline bool check_Dprime_w(const FormalContext& ctx) {
    for (size_t l = 0; l < ctx.rows.size(); ++l) {
        IPoly comp = IPoly::zero(ctx.table, ctx.order);
        for (int k = 1; k <= ctx.r; ++k)
            comp = comp + ctx.Dprime.at(l, static_cast<size_t>(k - 1)) * ctx.abcd(VarClass::B, k);
        const IPoly& gen = ctx.Jprime[l];
        bool ok = ctx.rows[l].kind == RowSpec::Kind::Eps ? comp == gen : comp == -gen;
        if (!ok) return false;
    }
    return true;
}

// ---- Groebner engines for a context ------------------------------------------

struct ContextEngines {
    groebner::PolyIdeal<Rat> J, Jprime;
    groebner::Budget budget;
};

inline ContextEngines make_engines(const FormalContext& ctx, long max_spairs = 200000, int extra_degree = 1) {
    ContextEngines eng;
    std::vector<QPoly> jq, jpq;
    for (const auto& g : ctx.J) jq.push_back(mpoly::to_rational(g));
    for (const auto& g : ctx.Jprime) jpq.push_back(mpoly::to_rational(g));
    eng.J = groebner::PolyIdeal<Rat>::from_gens(std::move(jq), ctx.table, ctx.order);
    eng.Jprime = groebner::PolyIdeal<Rat>::from_gens(std::move(jpq), ctx.table, ctx.order);
    eng.budget.max_spairs = max_spairs;
    eng.budget.degree_cap = std::max(2, ctx.r) + extra_degree;
    return eng;
}

enum class WhichIdeal { J, Jprime };

/// Borel stability: torus stability through weight homogeneity of every
/// generator, unipotent stability through Groebner membership of every
/// aux-coefficient of the conjugated generators.
inline bool check_B_stability(const FormalContext& ctx, ContextEngines& eng, WhichIdeal which) {
    const std::vector<IPoly>& gens = which == WhichIdeal::J ? ctx.J : ctx.Jprime;
    for (const auto& g : gens)
        if (!mpoly::weight_homogeneous(g)) return false;
    auto& ideal = which == WhichIdeal::J ? eng.J : eng.Jprime;
    auto endo = groebner::unipotent_substitution<Rat>(ctx.table);
    return groebner::stable_under_substitution(ideal, endo, eng.budget);
}

/// e is fixed by the Borel modulo J': weight 0 (torus part) and every
/// aux-coefficient of tau_x(e) - e reduces to zero against J'.
inline bool check_ebar_invariance(const FormalContext& ctx, ContextEngines& eng) {
    if (!ctx.e.is_zero()) {
        int w = 0;
        if (!mpoly::weight_homogeneous(ctx.e, &w) || w != 0) return false;
    }
    auto [moved, xi] = mpoly::apply_unipotent_aux(mpoly::to_rational(ctx.e));
    if (ctx.e.is_zero()) return true;
    QPoly lifted = mpoly::to_rational(ctx.e).lift_to(moved.table(), moved.order());
    QPoly diff = moved - lifted;
    groebner::groebner_basis(eng.Jprime, eng.budget);
    for (auto& [k, coeff] : diff.coefficients_in(xi)) {
        QPoly base = coeff.project_to(ctx.table, ctx.order);
        if (k == 0) {
            if (!base.is_zero()) return false;
            continue;
        }
        if (!eng.Jprime.engine->contains(base)) return false;
    }
    return true;
}

// ---- trace/determinant subring -----------------------------------------------

struct TraceDetGenerator {
    std::vector<int> word;  // 1-based letters
    enum class Flavor { Trace, Det } flavor = Flavor::Trace;
    IPoly expansion;

    std::string name() const {
        std::ostringstream os;
        os << (flavor == Flavor::Trace ? "tr(" : "det(");
        for (size_t t = 0; t < word.size(); ++t) os << (t ? "*" : "") << "rho" << word[t];
        os << ")";
        return os.str();
    }
};

/// tr(word) and det(word) for all nonempty words of length <= max_len,
/// traces deduplicated by cyclic equivalence, determinants by polynomial
/// value (det is multiplicative, so longer det words repeat).
inline std::vector<TraceDetGenerator> enumerate_A_generators(const FormalContext& ctx, int max_len) {
    if (max_len > 4) throw std::invalid_argument("enumerate_A_generators: word length cap is 4");
    std::vector<TraceDetGenerator> out;
    std::vector<std::vector<int>> words{{}};
    std::set<std::string> det_seen;
    for (int len = 1; len <= max_len; ++len) {
        std::vector<std::vector<int>> next;
        for (const auto& w : words)
            for (int letter = 1; letter <= ctx.r; ++letter) {
                auto nw = w;
                nw.push_back(letter);
                next.push_back(nw);
            }
        words = std::move(next);
        for (const auto& w : words) {
            // canonical cyclic rotation: lexicographically least
            bool canonical = true;
            for (size_t s = 1; s < w.size() && canonical; ++s) {
                std::vector<int> rot(w.begin() + static_cast<long>(s), w.end());
                rot.insert(rot.end(), w.begin(), w.begin() + static_cast<long>(s));
                if (rot < w) canonical = false;
            }
            Mat2<IPoly> prod = ctx.rho[static_cast<size_t>(w[0] - 1)];
            for (size_t t = 1; t < w.size(); ++t) prod = prod * ctx.rho[static_cast<size_t>(w[t] - 1)];
            if (canonical) {
                TraceDetGenerator g;
                g.word = w;
                g.flavor = TraceDetGenerator::Flavor::Trace;
                g.expansion = prod.trace();
                out.push_back(std::move(g));
            }
            IPoly dt = prod.det();
            if (det_seen.insert(dt.render()).second) {
                TraceDetGenerator g;
                g.word = w;
                g.flavor = TraceDetGenerator::Flavor::Det;
                g.expansion = std::move(dt);
                out.push_back(std::move(g));
            }
        }
    }
    return out;
}

// ---- membership certificates ---------------------------------------------------

struct CertTerm {
    Rat coeff;
    Monomial r0_mono;                 // monomial in row-entry variables
    std::vector<size_t> gen_indices;  // product of agens entries (size >= 1)
};

struct MembershipCertificate {
    std::vector<TraceDetGenerator> agens;
    std::vector<CertTerm> a_terms;
    std::vector<QPoly> cofactors;  // one per J generator
    IPoly target;
    Int denominator = 1;  // content record: lcm of all denominators

    QPoly a_part(const FormalContext& ctx) const {
        QPoly acc = QPoly::zero(ctx.table, ctx.order);
        for (const auto& t : a_terms) {
            QPoly term = QPoly::constant(ctx.table, ctx.order, t.coeff);
            QPoly mono(ctx.table, ctx.order);
            mono.mutable_terms().push_back({t.r0_mono, Rat(1)});
            term = term * mono;
            for (size_t gi : t.gen_indices) term = term * mpoly::to_rational(agens[gi].expansion);
            acc = acc + term;
        }
        return acc;
    }

    /// Exact identity target = a + sum cofactor_k * J_k over Q; no Groebner
    /// trust involved.
    bool verify_exact(const FormalContext& ctx) const {
        QPoly sum = a_part(ctx);
        for (size_t k = 0; k < cofactors.size(); ++k)
            sum = sum + cofactors[k] * mpoly::to_rational(ctx.J[k]);
        return sum == mpoly::to_rational(target);
    }
};

struct MembershipOptions {
    int degree_bound = 6;
    int max_products = 2;
    int max_word_len = 3;
    long max_columns = 250000;
};

namespace detail {

using mpoly::monomials_of_degree;

using SparseVec = std::map<long, Rat>;

struct SparseSolver {
    // column echelon with combination tracking
    struct PivotCol {
        long row;
        SparseVec col;
        SparseVec combo;
    };
    std::vector<PivotCol> pivots;
    std::map<long, size_t> pivot_by_row;

    static long first_row(const SparseVec& v) { return v.empty() ? -1 : v.begin()->first; }

    void reduce(SparseVec& v, SparseVec& combo) const {
        while (!v.empty()) {
            long rr = v.begin()->first;
            auto it = pivot_by_row.find(rr);
            if (it == pivot_by_row.end()) return;
            const PivotCol& p = pivots[it->second];
            Rat factor = v.begin()->second / p.col.begin()->second;
            axpy(v, -factor, p.col);
            axpy(combo, -factor, p.combo);
        }
    }

    /// Returns false if the column was dependent (not added).
    bool add_column(long index, SparseVec col) {
        SparseVec combo{{index, Rat(1)}};
        reduce(col, combo);
        if (col.empty()) return false;
        pivot_by_row[col.begin()->first] = pivots.size();
        pivots.push_back(PivotCol{col.begin()->first, std::move(col), std::move(combo)});
        return true;
    }

    /// Solve sum_j c_j col_j = target for the columns added so far.
    std::optional<SparseVec> solve(SparseVec target) const {
        SparseVec combo;
        while (!target.empty()) {
            long rr = target.begin()->first;
            auto it = pivot_by_row.find(rr);
            if (it == pivot_by_row.end()) return std::nullopt;
            const PivotCol& p = pivots[it->second];
            Rat factor = target.begin()->second / p.col.begin()->second;
            axpy(target, -factor, p.col);
            axpy(combo, factor, p.combo);
        }
        return combo;
    }

    static void axpy(SparseVec& dst, const Rat& factor, const SparseVec& src) {
        for (const auto& [k, val] : src) {
            Rat& slot = dst[k];
            slot += factor * val;
            if (slot == 0) dst.erase(k);
        }
    }
};

}  // namespace detail

/// Bounded-degree search for target = a + j with a in the trace/determinant
/// subring (R0-monomial combinations of products of <= max_products
/// generators) and j in J.  One sparse linear system over Q per homogeneous
/// degree: columns are ansatz terms and monomial multiples of the J
/// generators.  Found certificates are re-verified by exact expansion.
inline std::optional<MembershipCertificate> solve_membership_A_plus_J(const FormalContext& ctx, const IPoly& target,
                                                                      const MembershipOptions& opt = {}) {
    // homogeneous components of the target
    std::map<int, IPoly> comps;
    for (const auto& [m, c] : target.terms()) {
        auto [it, fresh] = comps.try_emplace(m.deg(), IPoly::zero(ctx.table, ctx.order));
        IPoly term(ctx.table, ctx.order);
        term.mutable_terms().push_back({m, c});
        it->second = it->second + term;
    }
    for (const auto& [d, comp] : comps)
        if (d > opt.degree_bound) return std::nullopt;

    auto agens = enumerate_A_generators(ctx, opt.max_word_len);
    std::vector<int> r0_vars;
    for (size_t v = 0; v < ctx.table->size(); ++v) {
        VarClass cls = ctx.table->info(v).cls;
        if (cls == VarClass::Eps || cls == VarClass::Delta) r0_vars.push_back(static_cast<int>(v));
    }
    std::vector<int> all_vars;
    for (size_t v = 0; v < ctx.table->size(); ++v) all_vars.push_back(static_cast<int>(v));

    MembershipCertificate cert;
    cert.agens = agens;
    cert.target = target;
    cert.cofactors.assign(ctx.J.size(), QPoly::zero(ctx.table, ctx.order));

    for (const auto& [d, comp] : comps) {
        if (comp.is_zero()) continue;
        // row indexing: monomial render -> id
        std::map<std::string, long> row_ids;
        auto row_of = [&](const Monomial& m) {
            // deterministic dense key
            std::string key(reinterpret_cast<const char*>(m.e.data()), m.e.size() * sizeof(std::uint16_t));
            auto [it, fresh] = row_ids.try_emplace(key, static_cast<long>(row_ids.size()));
            return it->second;
        };
        auto to_sparse = [&](const QPoly& f) {
            detail::SparseVec v;
            for (const auto& [m, c] : f.terms()) v[row_of(m)] = c;
            return v;
        };

        struct Column {
            bool is_ansatz;
            CertTerm term;           // ansatz
            size_t gen_index;        // J-multiple
            Monomial mult;
        };
        std::vector<Column> columns;
        std::vector<QPoly> column_polys;

        // ansatz columns: products of generators (multisets) with R0-monomial
        // cofactors filling the degree
        std::vector<std::vector<size_t>> products;
        std::vector<size_t> cur;
        std::function<void(size_t, int, int)> build = [&](size_t start, int depth, int deg_used) {
            if (depth > 0) products.push_back(cur);
            if (depth == opt.max_products) return;
            for (size_t g = start; g < agens.size(); ++g) {
                int dg = agens[g].expansion.degree();
                if (dg <= 0 || deg_used + dg > d) continue;
                cur.push_back(g);
                build(g, depth + 1, deg_used + dg);
                cur.pop_back();
            }
        };
        build(0, 0, 0);
        for (const auto& prod : products) {
            int dp = 0;
            QPoly p = QPoly::constant(ctx.table, ctx.order, Rat(1));
            for (size_t g : prod) {
                dp += agens[g].expansion.degree();
                p = p * mpoly::to_rational(agens[g].expansion);
            }
            for (const auto& mono : detail::monomials_of_degree(ctx.table, r0_vars, d - dp)) {
                QPoly m(ctx.table, ctx.order);
                m.mutable_terms().push_back({mono, Rat(1)});
                Column col;
                col.is_ansatz = true;
                col.term = CertTerm{Rat(1), mono, prod};
                columns.push_back(col);
                column_polys.push_back(p * m);
                if (static_cast<long>(columns.size()) > opt.max_columns)
                    throw BudgetExceeded("membership ansatz exceeds the column budget");
            }
        }
        // J-multiple columns
        for (size_t g = 0; g < ctx.J.size(); ++g) {
            int dg = ctx.J[g].degree();
            for (const auto& mono : detail::monomials_of_degree(ctx.table, all_vars, d - dg)) {
                QPoly m(ctx.table, ctx.order);
                m.mutable_terms().push_back({mono, Rat(1)});
                Column col;
                col.is_ansatz = false;
                col.gen_index = g;
                col.mult = mono;
                columns.push_back(col);
                column_polys.push_back(m * mpoly::to_rational(ctx.J[g]));
                if (static_cast<long>(columns.size()) > opt.max_columns)
                    throw BudgetExceeded("membership system exceeds the column budget");
            }
        }

        detail::SparseSolver solver;
        for (size_t cidx = 0; cidx < columns.size(); ++cidx) {
            auto sv = to_sparse(column_polys[cidx]);
            if (sv.empty()) continue;
            solver.add_column(static_cast<long>(cidx), std::move(sv));
        }
        auto sol = solver.solve(to_sparse(mpoly::to_rational(comp)));
        if (!sol) return std::nullopt;
        for (const auto& [cidx, coeff] : *sol) {
            if (coeff == 0) continue;
            const Column& col = columns[static_cast<size_t>(cidx)];
            if (col.is_ansatz) {
                CertTerm t = col.term;
                t.coeff = coeff;
                cert.a_terms.push_back(std::move(t));
            } else {
                QPoly m(ctx.table, ctx.order);
                m.mutable_terms().push_back({col.mult, coeff});
                cert.cofactors[col.gen_index] = cert.cofactors[col.gen_index] + m;
            }
        }
    }

    // content record: lcm of denominators across terms and cofactors
    Int lcm = 1;
    auto fold = [&](const Rat& q) {
        Int den = q.get_den();
        Int g;
        mpz_gcd(g.get_mpz_t(), lcm.get_mpz_t(), den.get_mpz_t());
        lcm = lcm / g * den;
    };
    for (const auto& t : cert.a_terms) fold(t.coeff);
    for (const auto& cof : cert.cofactors)
        for (const auto& [m, c] : cof.terms()) fold(c);
    cert.denominator = lcm;

    if (!cert.verify_exact(ctx)) throw std::logic_error("membership certificate failed exact re-verification");
    return cert;
}

/// Structural soundness of a certificate's a-part: nonempty generator words
/// only, and the a-part vanishes when every conjugation-acted variable is
/// set to zero (so its specialization lands in traces/determinants of actual
/// group-algebra elements).
inline bool check_air_structure(const FormalContext& ctx, const MembershipCertificate& cert) {
    for (const auto& t : cert.a_terms) {
        if (t.gen_indices.empty()) return false;
        for (size_t gi : t.gen_indices)
            if (cert.agens[gi].word.empty()) return false;
    }
    QPoly a = cert.a_part(ctx);
    // restrict to monomials with zero a/b/c/d-degree
    QPoly residue = QPoly::zero(ctx.table, ctx.order);
    for (const auto& [m, c] : a.terms()) {
        int acted = 0;
        for (size_t v = 0; v < ctx.table->size(); ++v) {
            VarClass cls = ctx.table->info(v).cls;
            if (cls == VarClass::A || cls == VarClass::B || cls == VarClass::C || cls == VarClass::D)
                acted += m.e[v];
        }
        if (acted == 0) {
            QPoly term(ctx.table, ctx.order);
            term.mutable_terms().push_back({m, c});
            residue = residue + term;
        }
    }
    return residue.is_zero();
}

// ---- Groebner-free Borel-invariance certificate --------------------------------

/// Expands det(tau_x(D')) - det(D') by row multilinearity and certifies each
/// nonzero summand as an explicit J'-combination via the column-operation
/// construction: scale columns i and j by b_i, b_j in the unreplaced rows,
/// then fold all columns into column i, which becomes (row . b-vector), i.e.
/// a signed J' generator per row.  Everything is verified by exact expansion;
/// no Groebner reduction is trusted.  Returns false with a note when any
/// identity fails.
inline bool ebar_rowop_certificate(const FormalContext& ctx, std::string* note = nullptr) {
    auto [ext, xi] = mpoly::extend_with_aux(ctx.table);
    auto eord = MonomialOrder::blocked(ext);
    auto lift = [&](const IPoly& f) { return f.lift_to(ext, eord); };
    IPoly x = IPoly::variable(ext, eord, xi, Int(1));
    auto zero = IPoly::zero(ext, eord);

    const size_t n = ctx.rows.size();
    // tau_x(D') rows minus D' rows
    Matrix<IPoly> Dp(n, n, zero), Delta(n, n, zero);
    for (size_t l = 0; l < n; ++l)
        for (size_t k = 0; k < n; ++k) {
            IPoly entry = lift(ctx.Dprime.at(l, k));
            Dp.at(l, k) = entry;
            Delta.at(l, k) = mpoly::apply_unipotent(ctx.Dprime.at(l, k), x) - entry;
        }

    IPoly moved_e = mpoly::apply_unipotent(ctx.e, x);
    IPoly total = moved_e - lift(ctx.e);  // = det(tau_x D') - det(D'), since D is Borel-fixed

    IPoly sum = zero;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        Matrix<IPoly> M(n, n, zero);
        bool zero_row = false;
        long wsel = -1;
        for (size_t l = 0; l < n; ++l) {
            bool replaced = mask & (1u << l);
            if (replaced) {
                bool delta_mixed = ctx.rows[l].kind == RowSpec::Kind::Delta && ctx.rows[l].i != ctx.rows[l].j;
                if (!delta_mixed) zero_row = true;
                if (wsel < 0 && delta_mixed) wsel = static_cast<long>(l);
            }
            for (size_t k = 0; k < n; ++k) M.at(l, k) = replaced ? Delta.at(l, k) : Dp.at(l, k);
        }
        if (zero_row) {
            // a replaced eps or (i,i) delta row vanishes identically
            if (!matrices::det_n(M).is_zero()) {
                if (note) *note = "vanishing replaced row produced a nonzero determinant";
                return false;
            }
            continue;
        }
        IPoly dM = matrices::det_n(M);
        sum = sum + dM;
        if (dM.is_zero()) continue;

        // column-operation certificate anchored at the first replaced row
        size_t w = static_cast<size_t>(wsel);
        size_t ci = static_cast<size_t>(ctx.rows[w].i - 1);
        size_t cj = static_cast<size_t>(ctx.rows[w].j - 1);
        Matrix<IPoly> Mh = M;
        auto bvar = [&](size_t k) { return lift(ctx.abcd(VarClass::B, static_cast<int>(k) + 1)); };
        // replaced row w: (x @ ci, -x @ cj); other rows scale cols ci, cj
        for (size_t l = 0; l < n; ++l) {
            if (l == w) {
                for (size_t k = 0; k < n; ++k) Mh.at(l, k) = zero;
                Mh.at(l, ci) = x;
                Mh.at(l, cj) = -x;
            } else {
                Mh.at(l, ci) = Mh.at(l, ci) * bvar(ci);
                Mh.at(l, cj) = Mh.at(l, cj) * bvar(cj);
            }
        }
        // col ci += col cj; then col ci += b_k * col k for k != ci, cj
        for (size_t l = 0; l < n; ++l) Mh.at(l, ci) = Mh.at(l, ci) + Mh.at(l, cj);
        for (size_t k = 0; k < n; ++k) {
            if (k == ci || k == cj) continue;
            for (size_t l = 0; l < n; ++l) Mh.at(l, ci) = Mh.at(l, ci) + bvar(k) * Mh.at(l, k);
        }
        if (!(matrices::det_n(Mh) == dM)) {
            if (note) *note = "column operations changed the determinant";
            return false;
        }
        // column ci must consist of signed J' generators (or zero);
        // expanding along it gives the explicit J'-combination
        IPoly recombined = zero;
        for (size_t l = 0; l < n; ++l) {
            const IPoly& entry = Mh.at(l, ci);
            if (entry.is_zero()) continue;
            bool matches = false;
            if (l != w) {
                const IPoly jp = lift(ctx.Jprime[l]);
                matches = entry == jp || entry == -jp;
            }
            if (!matches) {
                if (note) *note = "column entry is not a signed J' generator";
                return false;
            }
            // cofactor of (l, ci)
            std::vector<std::vector<IPoly>> minor_rows;
            for (size_t l2 = 0; l2 < n; ++l2) {
                if (l2 == l) continue;
                std::vector<IPoly> rr;
                for (size_t k = 0; k < n; ++k)
                    if (k != ci) rr.push_back(Mh.at(l2, k));
                minor_rows.push_back(std::move(rr));
            }
            IPoly cof = minor_rows.empty() ? IPoly::constant(ext, eord, Int(1))
                                           : matrices::det_n(Matrix<IPoly>::from_rows(minor_rows));
            if ((l + ci) % 2 == 1) cof = -cof;
            recombined = recombined + entry * cof;
        }
        if (!(recombined == dM)) {
            if (note) *note = "cofactor recombination mismatch";
            return false;
        }
    }
    if (!(sum == total)) {
        if (note) *note = "multilinearity expansion does not sum to det(tau_x D') - det(D')";
        return false;
    }
    return true;
}

// ---- numeric bridge -------------------------------------------------------------

/// Point for evaluating context polynomials in a finite ring: entries of the
/// numeric rho_i plus per-row relation entries.
inline std::vector<rings::RingElem> make_assignment(const FormalContext& ctx, const rings::RingPtr& T,
                                                    const std::vector<Mat2<rings::RingElem>>& rho,
                                                    const std::vector<std::vector<rings::RingElem>>& row_entries) {
    if (static_cast<int>(rho.size()) != ctx.r || row_entries.size() != ctx.rows.size())
        throw std::invalid_argument("make_assignment: arity mismatch");
    std::vector<rings::RingElem> point(ctx.table->size(), T->zero());
    for (int i = 1; i <= ctx.r; ++i) {
        point[static_cast<size_t>(ctx.table->index_of(VarClass::A, i))] = rho[static_cast<size_t>(i - 1)].a;
        point[static_cast<size_t>(ctx.table->index_of(VarClass::B, i))] = rho[static_cast<size_t>(i - 1)].b;
        point[static_cast<size_t>(ctx.table->index_of(VarClass::C, i))] = rho[static_cast<size_t>(i - 1)].c;
        point[static_cast<size_t>(ctx.table->index_of(VarClass::D, i))] = rho[static_cast<size_t>(i - 1)].d;
    }
    for (size_t l = 0; l < ctx.rows.size(); ++l) {
        if (row_entries[l].size() != static_cast<size_t>(ctx.r))
            throw std::invalid_argument("make_assignment: row entry arity mismatch");
        for (int k = 1; k <= ctx.r; ++k)
            point[static_cast<size_t>(ctx.entry_var[l][static_cast<size_t>(k - 1)])] =
                row_entries[l][static_cast<size_t>(k - 1)];
    }
    return point;
}

inline rings::RingElem eval_poly(const IPoly& f, const std::vector<rings::RingElem>& point,
                                 const rings::RingPtr& T) {
    return f.evaluate(point, T->zero());
}

}  // namespace ribet::formal
