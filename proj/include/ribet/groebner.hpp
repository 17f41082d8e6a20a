#pragma once

// Buchberger-based Groebner engine over field coefficients (Q, F_p):
// reduced bases, normal forms, ideal membership, and ideal-stability under
// ring substitutions.  Pair selection by sugar degree with the two classical
// pair-elimination criteria; a configurable S-pair budget raises
// BudgetExceeded.  For homogeneous input the loop may be truncated at a
// degree cap: a cap-d basis decides membership exactly for polynomials of
// degree <= d, which is all the relation-ideal checks need.

#include <functional>
#include <set>
#include <vector>

#include "ribet/poly.hpp"

namespace ribet::groebner {

using mpoly::Monomial;
using mpoly::MonomialOrder;
using mpoly::OrderPtr;
using mpoly::Poly;
using mpoly::VarTablePtr;

struct Budget {
    long max_spairs = 200000;
    int degree_cap = -1;  // -1: no cap; otherwise sound for homogeneous ideals
};

template <class C>
class Engine {
  public:
    Engine(std::vector<Poly<C>> gens, VarTablePtr tab, OrderPtr ord, Budget budget = {})
        : tab_(std::move(tab)), ord_(std::move(ord)), budget_(budget) {
        for (auto& g : gens) {
            if (g.is_zero()) continue;
            homogeneous_ = homogeneous_ && g.homogeneous();
            input_.push_back(monic(std::move(g)));
        }
        compute();
    }

    const std::vector<Poly<C>>& basis() const { return basis_; }
    const std::vector<Poly<C>>& generators() const { return input_; }
    long spairs_processed() const { return spairs_; }
    bool truncated() const { return truncated_; }
    int degree_cap() const { return budget_.degree_cap; }
    const VarTablePtr& table() const { return tab_; }
    const OrderPtr& order() const { return ord_; }

    /// Full normal form; NF(f) = 0 iff f lies in the ideal (for truncated
    /// bases this is valid up to the degree cap, homogeneous input only).
    Poly<C> normal_form(const Poly<C>& f) const {
        if (truncated_) {
            if (!homogeneous_)
                throw std::invalid_argument("normal_form: degree-capped basis of a non-homogeneous ideal");
            if (f.degree() > budget_.degree_cap)
                throw std::invalid_argument("normal_form: degree exceeds the basis cap");
        }
        return reduce(f, basis_);
    }

    bool contains(const Poly<C>& f) const { return normal_form(f).is_zero(); }

  private:
    static Poly<C> monic(Poly<C> f) {
        if (f.is_zero()) return f;
        auto inv = RingOps<C>::try_invert(f.lc());
        if (!inv) throw std::invalid_argument("groebner: leading coefficient not invertible (field required)");
        return f.scaled(*inv);
    }

    Poly<C> reduce(const Poly<C>& f, const std::vector<Poly<C>>& basis) const {
        Poly<C> work = f;
        Poly<C> rem(tab_, ord_);
        while (!work.is_zero()) {
            bool reduced = false;
            const Monomial& lm = work.lm();
            for (const auto& g : basis) {
                if (!g.lm().divides(lm)) continue;
                C coeff = -work.lc();
                work.axpy(coeff, g.lm().divide_into(lm), g);
                reduced = true;
                break;
            }
            if (!reduced) {
                rem.mutable_terms().push_back(work.terms().front());
                work.mutable_terms().erase(work.mutable_terms().begin());
            }
        }
        return rem;
    }

    struct Pair {
        int sugar;
        int lcm_deg;
        Monomial lcm;
        size_t i, j;
    };
    struct PairLess {
        const MonomialOrder* ord;
        bool operator()(const Pair& a, const Pair& b) const {
            if (a.sugar != b.sugar) return a.sugar < b.sugar;
            if (a.lcm_deg != b.lcm_deg) return a.lcm_deg < b.lcm_deg;
            int c = ord->cmp(a.lcm, b.lcm);
            if (c != 0) return c < 0;
            if (a.i != b.i) return a.i < b.i;
            return a.j < b.j;
        }
    };

    void add_pairs(size_t k, std::multiset<Pair, PairLess>& queue) {
        for (size_t i = 0; i < k; ++i) {
            Monomial l = basis_[i].lm().lcm_with(basis_[k].lm());
            int sug = std::max(sugars_[i] + l.deg() - basis_[i].lm().deg(),
                               sugars_[k] + l.deg() - basis_[k].lm().deg());
            queue.insert(Pair{sug, l.deg(), std::move(l), i, k});
        }
    }

    void compute() {
        basis_ = input_;
        sugars_.clear();
        for (const auto& g : basis_) sugars_.push_back(g.degree());
        std::multiset<Pair, PairLess> queue(PairLess{ord_.get()});
        for (size_t k = 1; k < basis_.size(); ++k) add_pairs(k, queue);
        std::set<std::pair<size_t, size_t>> handled;

        while (!queue.empty()) {
            Pair p = *queue.begin();
            queue.erase(queue.begin());
            handled.insert({p.i, p.j});
            if (budget_.degree_cap >= 0 && p.lcm_deg > budget_.degree_cap) {
                truncated_ = true;
                continue;
            }
            // coprime-leading-term criterion
            if (basis_[p.i].lm().coprime_with(basis_[p.j].lm())) continue;
            // chain criterion: some lm_k divides the lcm and both mixed pairs
            // were already treated
            bool chained = false;
            for (size_t k = 0; k < basis_.size() && !chained; ++k) {
                if (k == p.i || k == p.j) continue;
                if (!basis_[k].lm().divides(p.lcm)) continue;
                auto key1 = std::minmax(p.i, k);
                auto key2 = std::minmax(p.j, k);
                if (handled.count({key1.first, key1.second}) && handled.count({key2.first, key2.second}))
                    chained = true;
            }
            if (chained) continue;

            if (++spairs_ > budget_.max_spairs)
                throw BudgetExceeded("groebner: S-pair budget exceeded (" + std::to_string(budget_.max_spairs) + ")");

            Poly<C> s(tab_, ord_);
            C one = basis_[p.i].one_coeff();
            s.axpy(one, basis_[p.i].lm().divide_into(p.lcm), basis_[p.i]);
            s.axpy(-one, basis_[p.j].lm().divide_into(p.lcm), basis_[p.j]);
            Poly<C> nf = reduce(s, basis_);
            if (nf.is_zero()) continue;
            basis_.push_back(monic(std::move(nf)));
            sugars_.push_back(p.sugar);
            add_pairs(basis_.size() - 1, queue);
        }

        autoreduce();
    }

    void autoreduce() {
        // drop elements whose lead is divisible by another lead, then reduce
        // tails; canonical ascending order by leading monomial
        bool changed = true;
        while (changed) {
            changed = false;
            for (size_t i = 0; i < basis_.size(); ++i) {
                std::vector<Poly<C>> others;
                for (size_t j = 0; j < basis_.size(); ++j)
                    if (j != i) others.push_back(basis_[j]);
                Poly<C> r = reduce(basis_[i], others);
                if (r.is_zero()) {
                    basis_.erase(basis_.begin() + static_cast<long>(i));
                    sugars_.erase(sugars_.begin() + static_cast<long>(i));
                    changed = true;
                    break;
                }
                if (!(r == basis_[i])) {
                    basis_[i] = monic(std::move(r));
                    changed = true;
                }
            }
        }
        std::sort(basis_.begin(), basis_.end(),
                  [&](const Poly<C>& a, const Poly<C>& b) { return ord_->cmp(a.lm(), b.lm()) < 0; });
    }

    VarTablePtr tab_;
    OrderPtr ord_;
    Budget budget_;
    std::vector<Poly<C>> input_;
    std::vector<Poly<C>> basis_;
    std::vector<int> sugars_;
    long spairs_ = 0;
    bool truncated_ = false;
    bool homogeneous_ = true;
};

// ---- spec-surface wrappers ---------------------------------------------------

template <class C>
struct PolyIdeal {
    std::vector<Poly<C>> gens;
    VarTablePtr table;
    OrderPtr order;
    std::shared_ptr<Engine<C>> engine;  // cached reduced basis

    static PolyIdeal from_gens(std::vector<Poly<C>> gens, VarTablePtr tab, OrderPtr ord) {
        PolyIdeal I;
        I.gens = std::move(gens);
        I.table = std::move(tab);
        I.order = std::move(ord);
        return I;
    }
};

template <class C>
PolyIdeal<C>& groebner_basis(PolyIdeal<C>& I, Budget budget = {}) {
    if (!I.engine) I.engine = std::make_shared<Engine<C>>(I.gens, I.table, I.order, budget);
    return I;
}

template <class C>
Poly<C> normal_form(const Poly<C>& f, PolyIdeal<C>& I, Budget budget = {}) {
    groebner_basis(I, budget);
    return I.engine->normal_form(f);
}

template <class C>
bool contains(PolyIdeal<C>& I, const Poly<C>& f, Budget budget = {}) {
    return normal_form(f, I, budget).is_zero();
}

/// A ring endomorphism given by variable substitution, possibly into a table
/// extended by one aux variable whose coefficients are the stability
/// witnesses.
template <class C>
struct Substitution {
    VarTablePtr ext;
    OrderPtr ext_order;
    int aux_index = -1;  // -1: compare whole images
    std::function<Poly<C>(const Poly<C>&)> apply;
};

/// The lower-unipotent conjugation substitution over base + fresh aux.
template <class C>
Substitution<C> unipotent_substitution(const VarTablePtr& base) {
    auto [ext, xi] = mpoly::extend_with_aux(base);
    auto eord = MonomialOrder::blocked(ext);
    Substitution<C> s;
    s.ext = ext;
    s.ext_order = eord;
    s.aux_index = xi;
    s.apply = [ext = s.ext, eord, xi](const Poly<C>& f) {
        if (f.is_zero()) return Poly<C>::zero(ext, eord);
        auto x = Poly<C>::variable(ext, eord, xi, RingOps<C>::one(f.terms().front().second));
        return mpoly::apply_unipotent(f, x);
    };
    return s;
}

/// True iff endo(g) has every aux-coefficient inside the ideal, for every
/// generator g (the aux^0 coefficient included).
template <class C>
bool stable_under_substitution(PolyIdeal<C>& I, const Substitution<C>& endo, Budget budget = {}) {
    groebner_basis(I, budget);
    for (const auto& g : I.gens) {
        Poly<C> h = endo.apply(g);
        if (endo.aux_index < 0) {
            if (!I.engine->contains(h)) return false;
            continue;
        }
        for (auto& [k, coeff] : h.coefficients_in(endo.aux_index)) {
            Poly<C> base_part = coeff.project_to(I.table, I.order);
            if (!I.engine->contains(base_part)) return false;
        }
    }
    return true;
}

}  // namespace ribet::groebner
