// Native evaluator for the square of the hairy differential.
//
// Terms of delta(delta(g)) are accumulated on a fixed-label normal form
// (edge and hair lists sorted, vertex labels kept).  Cancellation there
// implies cancellation in the complex, so only the survivors are brought to
// canonical form.  Splittings are enumerated up to permutations of
// interchangeable half-edges (hairs at one vertex, parallel edges to one
// neighbour), which act on a nonzero graph by +1.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <array>
#include <cstring>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

namespace py = pybind11;

namespace {

struct Edge {
    int s, t;
    bool d;
};

struct Gr {
    int v = 0;
    std::vector<Edge> e;
    std::vector<int> h;
};

struct Prof {
    int m, n;
    bool vodd, eodd, hodd, fodd;
    Prof(int m_, int n_) : m(m_), n(n_) {
        vodd = (n & 1) == 1;
        eodd = (n & 1) == 0;
        hodd = (m & 1) == (n & 1);
        fodd = (n & 1) == 1;
    }
};



constexpr int MAXV = 32;
constexpr int MAXE = 96;
constexpr int MAXH = 32;

inline int edge_code(int a, int b, bool d) { return (a << 8) | (b << 1) | (d ? 1 : 0); }

template <typename T>
int sort_parity(T* a, int n);

bool obviously_zero(const Gr& g, const Prof& p) {
    if (p.fodd)
        for (auto& e : g.e)
            if (e.s == e.t && !e.d) return true;
    if (p.eodd) {
        int codes[MAXE];
        int k = 0;
        for (auto& e : g.e) {
            int a = e.s, b = e.t;
            if (!e.d && a > b) std::swap(a, b);
            codes[k++] = edge_code(a, b, e.d);
        }
        sort_parity(codes, k);
        for (int i = 1; i < k; ++i)
            if (codes[i] == codes[i - 1]) return true;
    }
    if (p.hodd) {
        int hs[MAXH];
        int k = 0;
        for (int a : g.h) hs[k++] = a;
        sort_parity(hs, k);
        for (int i = 1; i < k; ++i)
            if (hs[i] == hs[i - 1]) return true;
    }
    return false;
}

struct KeyBuf {
    int ne = 0, nh = 0;
    uint16_t e[MAXE];
    uint8_t h[MAXH];
};

// insertion sort; returns the parity of the sorting permutation
template <typename T>
int sort_parity(T* a, int n) {
    int par = 0;
    for (int i = 1; i < n; ++i) {
        T x = a[i];
        int j = i - 1;
        while (j >= 0 && a[j] > x) {
            a[j + 1] = a[j];
            --j;
            par ^= 1;
        }
        a[j + 1] = x;
    }
    return par;
}

int perm_parity_arr(const int* p, int n) {
    bool seen[MAXV] = {false};
    int par = 0;
    for (int i = 0; i < n; ++i) {
        if (seen[i]) continue;
        int j = i, len = 0;
        while (!seen[j]) {
            seen[j] = true;
            j = p[j];
            ++len;
        }
        par ^= (len - 1) & 1;
    }
    return par;
}

// key of g relabeled by lab; returns the parity of the reordering
int make_key(const Gr& g, const int* lab, const Prof& p, KeyBuf& k) {
    int flips = 0;
    k.ne = static_cast<int>(g.e.size());
    k.nh = static_cast<int>(g.h.size());
    for (int i = 0; i < k.ne; ++i) {
        const Edge& e = g.e[i];
        int a = lab[e.s], b = lab[e.t];
        if (!e.d && a > b) {
            std::swap(a, b);
            ++flips;
        }
        k.e[i] = static_cast<uint16_t>(edge_code(a, b, e.d));
    }
    for (int i = 0; i < k.nh; ++i) k.h[i] = static_cast<uint8_t>(lab[g.h[i]]);
    int parity = 0;
    if (p.vodd) parity ^= perm_parity_arr(lab, g.v);
    if (p.fodd) parity ^= flips & 1;
    int pe = sort_parity(k.e, k.ne);
    int ph = sort_parity(k.h, k.nh);
    if (p.eodd) parity ^= pe;
    if (p.hodd) parity ^= ph;
    return parity;
}

inline int key_cmp(const KeyBuf& a, const KeyBuf& b) {
    for (int i = 0; i < a.ne; ++i)
        if (a.e[i] != b.e[i]) return a.e[i] < b.e[i] ? -1 : 1;
    for (int i = 0; i < a.nh; ++i)
        if (a.h[i] != b.h[i]) return a.h[i] < b.h[i] ? -1 : 1;
    return 0;
}

std::string key_string(int v, const KeyBuf& k) {
    std::string key;
    key.reserve(2 + 2 * k.ne + k.nh);
    key.push_back(static_cast<char>(v));
    key.push_back(static_cast<char>(k.ne));
    for (int i = 0; i < k.ne; ++i) {
        key.push_back(static_cast<char>((k.e[i] >> 8) & 0xff));
        key.push_back(static_cast<char>(k.e[i] & 0xff));
    }
    for (int i = 0; i < k.nh; ++i) key.push_back(static_cast<char>(k.h[i]));
    return key;
}

void check_size(const Gr& g) {
    if (g.v > MAXV || static_cast<int>(g.e.size()) > MAXE || static_cast<int>(g.h.size()) > MAXH)
        throw std::length_error("graph too large for the native kernel");
}

// ---------------------------------------------------------------------------
// canonical form: colour refinement plus individualization, least key wins

inline uint64_t mix(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

struct Csr {
    int v;
    int start[MAXV + 1];
    int code[2 * MAXE];  // kind * MAXV + neighbour
};

struct CanonState {
    const Gr* g;
    const Prof* p;
    const Csr* adj;
    KeyBuf base;  // key under the identity labeling
    int base_parity = 0;
    bool odd_automorphism = false;
    KeyBuf best;
    int best_parity = 0;
    bool have = false;
    bool zero = false;
};

// Equivariant refinement.  Cell signatures are hashed; a collision can only
// merge cells, which keeps the partition invariant and leaves the final
// separation to individualization.  Returns the number of cells.
int refine(int* colors, int ncells, const Csr& adj) {
    int v = adj.v;
    std::pair<uint64_t, int> order[MAXV];
    while (true) {
        for (int x = 0; x < v; ++x) {
            // a sum of mixed codes hashes the neighbour multiset without sorting
            uint64_t acc = 0;
            for (int i = adj.start[x]; i < adj.start[x + 1]; ++i) {
                int c = adj.code[i];
                acc += mix(static_cast<uint64_t>((c / MAXV) * 64 + colors[c % MAXV]) + 7);
            }
            uint64_t h = mix(acc ^ mix(static_cast<uint64_t>(colors[x]) + 1));
            // the old colour stays the primary sort key so cells only split
            order[x] = {(static_cast<uint64_t>(colors[x]) << 40) | (h >> 24), x};
        }
        std::sort(order, order + v);
        int rank = -1;
        uint64_t prev = 0;
        for (int i = 0; i < v; ++i) {
            if (i == 0 || order[i].first != prev) ++rank;
            prev = order[i].first;
            colors[order[i].second] = rank;
        }
        if (rank + 1 == ncells) return ncells;
        ncells = rank + 1;
    }
}

void leaves(const int* in, int ncells, CanonState& st) {
    int v = st.adj->v;
    int colors[MAXV];
    std::copy(in, in + v, colors);
    ncells = refine(colors, ncells, *st.adj);
    if (ncells == v) {
        KeyBuf k;
        int parity = make_key(*st.g, colors, *st.p, k);
        int c = st.have ? key_cmp(k, st.best) : -1;
        if (c < 0) {
            st.best = k;
            st.best_parity = parity;
            st.have = true;
            st.zero = false;
        } else if (c == 0 && parity != st.best_parity) {
            st.zero = true;
        }
        return;
    }
    int counts[MAXV] = {0};
    for (int x = 0; x < v; ++x) counts[colors[x]]++;
    int target = 0;
    while (counts[target] < 2) ++target;
    int ind[MAXV];
    int reps[MAXV];
    int nreps = 0;
    int lab[MAXV];
    for (int y = 0; y < v; ++y) lab[y] = y;
    KeyBuf k;
    for (int x = 0; x < v; ++x) {
        if (colors[x] != target) continue;
        // a transposition (r x) that is an automorphism fixes every
        // individualized vertex, so the branch at x repeats the one at r
        bool twin = false;
        for (int i = 0; i < nreps && !twin; ++i) {
            int r = reps[i];
            lab[r] = x;
            lab[x] = r;
            int par = make_key(*st.g, lab, *st.p, k);
            lab[r] = r;
            lab[x] = x;
            if (key_cmp(k, st.base) == 0) {
                twin = true;
                if (par != st.base_parity) {
                    st.odd_automorphism = true;
                    return;
                }
            }
        }
        if (twin) continue;
        reps[nreps++] = x;
        // x keeps the target colour, the rest of its cell moves just above it
        for (int y = 0; y < v; ++y) ind[y] = colors[y] + (colors[y] > target || (colors[y] == target && y != x) ? 1 : 0);
        leaves(ind, ncells + 1, st);
        if (st.odd_automorphism) return;
    }
}

// canonical key written to `out`; returns the sign, 0 for a zero graph
int canonical_key_buf(const Gr& g, const Prof& p, KeyBuf& out) {
    check_size(g);
    if (obviously_zero(g, p)) return 0;
    Csr adj;
    adj.v = g.v;
    int deg[MAXV + 1] = {0};
    for (auto& e : g.e) {
        deg[e.s]++;
        deg[e.t]++;
    }
    adj.start[0] = 0;
    for (int x = 0; x < g.v; ++x) adj.start[x + 1] = adj.start[x] + deg[x];
    int fill[MAXV];
    std::copy(adj.start, adj.start + g.v, fill);
    for (auto& e : g.e) {
        int ks = e.d ? 1 : 0, kt = e.d ? 2 : 0;
        adj.code[fill[e.s]++] = ks * MAXV + e.t;
        adj.code[fill[e.t]++] = kt * MAXV + e.s;
    }
    // initial colours: hair count, then the multiset of edge kinds
    std::pair<uint64_t, int> order[MAXV];
    for (int x = 0; x < g.v; ++x) {
        uint64_t kinds[3] = {0, 0, 0};
        for (int i = adj.start[x]; i < adj.start[x + 1]; ++i) kinds[adj.code[i] / MAXV]++;
        uint64_t nh = 0;
        for (int a : g.h) nh += (a == x);
        order[x] = {(nh << 48) | ((kinds[0] + kinds[1] + kinds[2]) << 36) | (kinds[1] << 24) | (kinds[2] << 12), x};
    }
    std::sort(order, order + g.v);
    int colors[MAXV];
    int rank = -1;
    uint64_t prev = 0;
    for (int i = 0; i < g.v; ++i) {
        if (i == 0 || order[i].first != prev) ++rank;
        prev = order[i].first;
        colors[order[i].second] = rank;
    }
    CanonState st;
    st.g = &g;
    st.p = &p;
    st.adj = &adj;
    if (g.v == 0) {
        st.best_parity = make_key(g, colors, p, st.best);
    } else {
        int id[MAXV];
        for (int x = 0; x < g.v; ++x) id[x] = x;
        st.base_parity = make_key(g, id, p, st.base);
        leaves(colors, rank + 1, st);
    }
    if (st.odd_automorphism || st.zero) return 0;
    out = st.best;
    return st.best_parity ? -1 : 1;
}

std::pair<std::string, int> canonical(const Gr& g, const Prof& p) {
    KeyBuf k;
    int sign = canonical_key_buf(g, p, k);
    if (sign == 0) return {std::string(), 0};
    return {key_string(g.v, k), sign};
}

// ---------------------------------------------------------------------------
// Koszul words for the hair terms

enum Kind { KV, KEO, KHS, KHT, KHA, KHO, KHF, KHX };

int kind_parity(int kind, const Prof& p) {
    switch (kind) {
        case KV: case KHS: case KHT: case KHA: case KHF:
            return p.n & 1;
        case KEO: case KHO:
            return (p.n + 1) & 1;
        case KHX:
            return p.m & 1;
    }
    return 0;
}

inline int obj(int kind, int tag, int idx) { return (kind << 12) | (tag << 8) | idx; }
inline int obj_kind(int o) { return o >> 12; }

std::vector<int> word_of(const Gr& g, int tag) {
    std::vector<int> w;
    for (int i = 0; i < g.v; ++i) w.push_back(obj(KV, tag, i));
    for (size_t k = 0; k < g.e.size(); ++k) {
        w.push_back(obj(KEO, tag, k));
        w.push_back(obj(KHS, tag, k));
        w.push_back(obj(KHT, tag, k));
    }
    for (size_t j = 0; j < g.h.size(); ++j) {
        w.push_back(obj(KHA, tag, j));
        w.push_back(obj(KHO, tag, j));
        w.push_back(obj(KHF, tag, j));
        w.push_back(obj(KHX, tag, j));
    }
    return w;
}

int word_par(const std::vector<int>& w, const Prof& p) {
    int s = 0;
    for (int o : w) s ^= kind_parity(obj_kind(o), p);
    return s;
}

int koszul(const std::vector<int>& cur, const std::vector<int>& target, const Prof& p) {
    thread_local std::vector<int> pos(8 << 12, -1);
    int k = 0;
    for (int o : target)
        if (kind_parity(obj_kind(o), p)) pos[o] = k++;
    int perm[4 * (MAXE + MAXH) + MAXV];
    int q = 0;
    for (int o : cur)
        if (kind_parity(obj_kind(o), p)) perm[q++] = pos[o];
    for (int o : target) pos[o] = -1;
    if (q != k) throw std::logic_error("word mismatch");
    for (int i = 0; i < q; ++i)
        if (perm[i] < 0) throw std::logic_error("word mismatch");
    return sort_parity(perm, q) ? -1 : 1;
}

// ---------------------------------------------------------------------------
// labeled terms of the differential; coefficients are doubled integers

struct Term {
    Gr g;
    int64_t c2;
};

void split_terms(const Gr& g, const Prof& p, int policy, std::vector<Term>& out) {
    int n = p.n;
    int e = static_cast<int>(g.e.size());
    int base = (((n + 1) * e) & 1) ? -1 : 1;
    for (int w = 0; w < g.v; ++w) {
        int sign = base * (((n * w) & 1) ? -1 : 1);
        // half-edges at w: (kind, index), kind 0 = source end, 1 = target end, 2 = hair
        std::vector<std::pair<int, int>> halves;
        for (int k = 0; k < e; ++k) {
            if (g.e[k].s == w) halves.push_back({0, k});
            if (g.e[k].t == w) halves.push_back({1, k});
        }
        for (size_t j = 0; j < g.h.size(); ++j)
            if (g.h[j] == w) halves.push_back({2, static_cast<int>(j)});
        int d = static_cast<int>(halves.size());
        auto shift = [w](int x) { return x <= w ? x : x + 1; };
        auto build = [&](const std::vector<char>& moved) {
            Gr r;
            r.v = g.v + 1;
            r.e.reserve(e + 1);
            for (int k = 0; k < e; ++k) {
                int s = shift(g.e[k].s), t = shift(g.e[k].t);
                r.e.push_back({s, t, g.e[k].d});
            }
            r.h.reserve(g.h.size());
            for (int a : g.h) r.h.push_back(shift(a));
            for (int i = 0; i < d; ++i) {
                if (!moved[i]) continue;
                auto [kind, idx] = halves[i];
                if (kind == 0) r.e[idx].s = w + 1;
                else if (kind == 1) r.e[idx].t = w + 1;
                else r.h[idx] = w + 1;
            }
            r.e.push_back({w, w + 1, false});
            return r;
        };
        if (d == 0) {
            if (policy <= 1) out.push_back({build({}), static_cast<int64_t>(sign)});
            continue;
        }
        // classes of interchangeable half-edges
        std::map<std::pair<int, int>, std::vector<int>> cls;
        for (int i = 0; i < d; ++i) {
            auto [kind, idx] = halves[i];
            std::pair<int, int> key;
            if (kind == 2) key = {-1, 0};
            else {
                const Edge& ed = g.e[idx];
                int other = kind == 0 ? ed.t : ed.s;
                int role = ed.d ? (kind == 0 ? 1 : 2) : 0;
                key = {other, role};
            }
            cls[key].push_back(i);
        }
        std::vector<std::vector<int>> classes;
        int first_class = -1;
        for (auto& kv : cls) {
            if (kv.second.front() == 0) first_class = static_cast<int>(classes.size());
            classes.push_back(kv.second);
        }
        int nc = static_cast<int>(classes.size());
        std::vector<int> j(nc, 0);
        while (true) {
            int moved_count = 0;
            for (int c = 0; c < nc; ++c) moved_count += j[c];
            int a = d - moved_count, b = moved_count;
            if (std::min(a, b) + 1 >= policy) {
                int64_t mult = 1;
                std::vector<char> moved(d, 0);
                for (int c = 0; c < nc; ++c) {
                    const auto& mem = classes[c];
                    int avail = static_cast<int>(mem.size()) - (c == first_class ? 1 : 0);
                    // binomial(avail, j[c])
                    int64_t bn = 1;
                    for (int q = 0; q < j[c]; ++q) bn = bn * (avail - q) / (q + 1);
                    mult *= bn;
                    int start = c == first_class ? 1 : 0;
                    for (int q = 0; q < j[c]; ++q) moved[mem[start + q]] = 1;
                }
                out.push_back({build(moved), 2 * sign * mult});
            }
            int c = 0;
            while (c < nc) {
                int cap = static_cast<int>(classes[c].size()) - (c == first_class ? 1 : 0);
                if (j[c] < cap) {
                    j[c]++;
                    break;
                }
                j[c] = 0;
                ++c;
            }
            if (c == nc) break;
        }
    }
}

void hair_terms(const Gr& g, const Prof& p, int policy, std::vector<Term>& out) {
    if (policy > 2) return;
    int m = p.m;
    Gr mu;
    mu.v = 1;
    mu.h = {0};
    std::vector<int> wmu = word_of(mu, 0), wg = word_of(g, 1);
    int px = word_par(wmu, p);
    int pre = ((m + 1 + m * px) & 1) ? -1 : 1;
    std::vector<int> word;
    word.insert(word.end(), wmu.begin(), wmu.end());
    word.insert(word.end(), wg.begin(), wg.end());
    int V = g.v, E = static_cast<int>(g.e.size()), H = static_cast<int>(g.h.size());
    auto contract = [&](int ext, std::vector<int>& cur) {
        cur.clear();
        int sg = 1, before = 0;
        bool hit = false;
        for (int o : word) {
            if (o == ext) {
                hit = true;
                continue;
            }
            if (!hit) before ^= kind_parity(obj_kind(o), p);
            cur.push_back(o);
        }
        if ((m & 1) && before) sg = -1;
        return sg;
    };
    std::vector<int> cur;
    // mu's hair onto vertex u of g
    {
        int sg = contract(obj(KHX, 0, 0), cur);
        std::vector<int> target;
        target.push_back(obj(KV, 0, 0));
        for (int i = 0; i < V; ++i) target.push_back(obj(KV, 1, i));
        target.push_back(obj(KHO, 0, 0));
        target.push_back(obj(KHA, 0, 0));
        target.push_back(obj(KHF, 0, 0));
        for (int k = 0; k < E; ++k) {
            target.push_back(obj(KEO, 1, k));
            target.push_back(obj(KHS, 1, k));
            target.push_back(obj(KHT, 1, k));
        }
        for (int jj = 0; jj < H; ++jj) {
            target.push_back(obj(KHA, 1, jj));
            target.push_back(obj(KHO, 1, jj));
            target.push_back(obj(KHF, 1, jj));
            target.push_back(obj(KHX, 1, jj));
        }
        int s = pre * sg * koszul(cur, target, p);
        for (int u = 0; u < V; ++u) {
            Gr r;
            r.v = V + 1;
            r.e.push_back({0, u + 1, false});
            for (auto& ed : g.e) r.e.push_back({ed.s + 1, ed.t + 1, ed.d});
            for (int a : g.h) r.h.push_back(a + 1);
            out.push_back({r, 2 * static_cast<int64_t>(s)});
        }
    }
    // hair j of g onto mu's vertex
    int c = (m % 2 == 0) ? -1 : 1;
    for (int jh = 0; jh < H; ++jh) {
        int sg = contract(obj(KHX, 1, jh), cur);
        std::vector<int> target;
        target.push_back(obj(KV, 0, 0));
        for (int i = 0; i < V; ++i) target.push_back(obj(KV, 1, i));
        for (int k = 0; k < E; ++k) {
            target.push_back(obj(KEO, 1, k));
            target.push_back(obj(KHS, 1, k));
            target.push_back(obj(KHT, 1, k));
        }
        target.push_back(obj(KHO, 1, jh));
        target.push_back(obj(KHA, 1, jh));
        target.push_back(obj(KHF, 1, jh));
        target.push_back(obj(KHA, 0, 0));
        target.push_back(obj(KHO, 0, 0));
        target.push_back(obj(KHF, 0, 0));
        target.push_back(obj(KHX, 0, 0));
        for (int jj = 0; jj < H; ++jj) {
            if (jj == jh) continue;
            target.push_back(obj(KHA, 1, jj));
            target.push_back(obj(KHO, 1, jj));
            target.push_back(obj(KHF, 1, jj));
            target.push_back(obj(KHX, 1, jj));
        }
        int s = pre * c * sg * koszul(cur, target, p);
        Gr r;
        r.v = V + 1;
        for (auto& ed : g.e) r.e.push_back({ed.s + 1, ed.t + 1, ed.d});
        r.e.push_back({g.h[jh] + 1, 0, false});
        r.h.push_back(0);
        for (int jj = 0; jj < H; ++jj)
            if (jj != jh) r.h.push_back(g.h[jj] + 1);
        out.push_back({r, 2 * static_cast<int64_t>(s)});
    }
}

void delta_terms_into(const Gr& g, const Prof& p, int policy, std::vector<Term>& out) {
    for (auto& e : g.e)
        if (e.d) throw std::invalid_argument("the native kernel handles undirected hairy graphs only");
    split_terms(g, p, policy, out);
    hair_terms(g, p, policy, out);
}

Gr from_py(int v, const std::vector<std::tuple<int, int, bool>>& edges, const std::vector<int>& hairs) {
    Gr g;
    g.v = v;
    if (v > MAXV - 2) throw std::length_error("graph too large for the native kernel");
    for (auto& [s, t, d] : edges) {
        if (s < 0 || s >= v || t < 0 || t >= v) throw std::invalid_argument("edge out of range");
        g.e.push_back({s, t, d});
    }
    for (int a : hairs) {
        if (a < 0 || a >= v) throw std::invalid_argument("hair out of range");
        g.h.push_back(a);
    }
    return g;
}

py::tuple to_py(const Gr& g) {
    py::list es, hs;
    for (auto& e : g.e) es.append(py::make_tuple(e.s, e.t, e.d));
    for (int a : g.h) hs.append(a);
    return py::make_tuple(g.v, py::tuple(es), py::tuple(hs));
}

Gr decode(const std::string& key) {
    Gr g;
    g.v = static_cast<unsigned char>(key[0]);
    int ne = static_cast<unsigned char>(key[1]);
    size_t pos = 2;
    for (int k = 0; k < ne; ++k) {
        int c = (static_cast<unsigned char>(key[pos]) << 8) | static_cast<unsigned char>(key[pos + 1]);
        pos += 2;
        g.e.push_back({c >> 8, (c >> 1) & 0x7f, (c & 1) != 0});
    }
    for (; pos < key.size(); ++pos) g.h.push_back(static_cast<unsigned char>(key[pos]));
    return g;
}

// ---------------------------------------------------------------------------
// python entry points

py::list py_delta_terms(int v, std::vector<std::tuple<int, int, bool>> edges, std::vector<int> hairs, int m, int n,
                        int policy) {
    Prof p(m, n);
    Gr g = from_py(v, edges, hairs);
    std::vector<Term> out;
    delta_terms_into(g, p, policy, out);
    py::list res;
    for (auto& t : out) res.append(py::make_tuple(to_py(t.g), t.c2));
    return res;
}

py::tuple py_canonical(int v, std::vector<std::tuple<int, int, bool>> edges, std::vector<int> hairs, int m, int n) {
    Prof p(m, n);
    Gr g = from_py(v, edges, hairs);
    auto [key, sign] = canonical(g, p);
    if (sign == 0) return py::make_tuple(py::none(), 0);
    return py::make_tuple(to_py(decode(key)), sign);
}

// Interned byte strings: one arena plus an open-addressing table.
class Interner {
  public:
    Interner() { clear(); }

    void clear() {
        arena_.clear();
        offsets_.assign(1, 0);
        hashes_.clear();
        slots_.assign(1 << 16, -1);
    }

    int size() const { return static_cast<int>(hashes_.size()); }

    int find_or_add(const char* data, int len) {
        uint64_t h = hash(data, len);
        if (2 * (hashes_.size() + 1) > slots_.size()) grow();
        size_t mask = slots_.size() - 1;
        size_t i = h & mask;
        while (slots_[i] != -1) {
            int id = slots_[i];
            if (hashes_[id] == h && length(id) == len && std::memcmp(arena_.data() + offsets_[id], data, len) == 0)
                return id;
            i = (i + 1) & mask;
        }
        int id = size();
        arena_.insert(arena_.end(), data, data + len);
        offsets_.push_back(static_cast<int64_t>(arena_.size()));
        hashes_.push_back(h);
        slots_[i] = id;
        return id;
    }

    std::string get(int id) const { return std::string(arena_.data() + offsets_[id], length(id)); }

  private:
    static uint64_t hash(const char* data, int len) {
        uint64_t h = 0xcbf29ce484222325ULL;
        for (int i = 0; i < len; ++i) h = (h ^ static_cast<unsigned char>(data[i])) * 0x100000001b3ULL;
        return mix(h);
    }

    int length(int id) const { return static_cast<int>(offsets_[id + 1] - offsets_[id]); }

    void grow() {
        std::vector<int> fresh(slots_.size() * 2, -1);
        size_t mask = fresh.size() - 1;
        for (int id = 0; id < size(); ++id) {
            size_t i = hashes_[id] & mask;
            while (fresh[i] != -1) i = (i + 1) & mask;
            fresh[i] = id;
        }
        slots_.swap(fresh);
    }

    std::vector<char> arena_;
    std::vector<int64_t> offsets_;
    std::vector<uint64_t> hashes_;
    std::vector<int> slots_;
};

int key_bytes(int v, const KeyBuf& k, char* out) {
    int n = 0;
    out[n++] = static_cast<char>(v);
    out[n++] = static_cast<char>(k.ne);
    for (int i = 0; i < k.ne; ++i) {
        out[n++] = static_cast<char>((k.e[i] >> 8) & 0xff);
        out[n++] = static_cast<char>(k.e[i] & 0xff);
    }
    for (int i = 0; i < k.nh; ++i) out[n++] = static_cast<char>(k.h[i]);
    return n;
}

// Differential on canonical forms, memoized across calls.  delta squared of
// a graph is then a sparse combination of cached rows.
class DeltaSquared {
  public:
    using Row = std::vector<std::pair<int, int64_t>>;

    DeltaSquared(int m, int n, int policy) : p_(m, n), policy_(policy) {
        if (policy != 1 && policy != 3) throw std::invalid_argument("policy must be 1 or 3");
    }

    py::list check(int v, std::vector<std::tuple<int, int, bool>> edges, std::vector<int> hairs) {
        Gr g = from_py(v, edges, hairs);
        py::list residual;
        int sign = 0;
        int id = intern(g, sign);
        if (sign == 0) return residual;
        Row top = row_of(id);
        std::unordered_map<int, int64_t> acc;
        for (auto& [mid, c] : top) {
            const Row& row2 = row_of(mid);
            for (auto& [tid, d] : row2) acc[tid] += c * d;
        }
        std::vector<std::pair<std::string, int64_t>> bad;
        for (auto& [tid, c] : acc)
            if (c != 0) bad.push_back({keys_.get(tid), c});
        std::sort(bad.begin(), bad.end());
        for (auto& [k, c] : bad) residual.append(py::make_tuple(to_py(decode(k)), c * sign));
        return residual;
    }

    // forget every cached row; safe between source slices since the
    // differential preserves the hair count and raises v and e by one
    void clear() {
        keys_.clear();
        rows_.clear();
        done_.clear();
    }

    py::dict stats() const {
        py::dict d;
        d["cached_graphs"] = static_cast<int64_t>(keys_.size());
        d["rows"] = rows_done_;
        d["labeled_terms"] = labeled_;
        return d;
    }

  private:
    int intern(const Gr& g, int& sign) {
        KeyBuf k;
        sign = canonical_key_buf(g, p_, k);
        if (sign == 0) return -1;
        char buf[2 + 2 * MAXE + MAXH];
        int len = key_bytes(g.v, k, buf);
        int id = keys_.find_or_add(buf, len);
        if (id == static_cast<int>(done_.size())) {
            rows_.emplace_back();
            done_.push_back(0);
        }
        return id;
    }

    // row of the differential on the canonical graph `id`, doubled coefficients
    const Row& row_of(int id) {
        if (done_[id]) return rows_[id];
        Gr g = decode(keys_.get(id));
        std::vector<Term> terms;
        delta_terms_into(g, p_, policy_, terms);
        labeled_ += static_cast<int64_t>(terms.size());
        Row row;
        row.reserve(terms.size());
        for (auto& t : terms) {
            int s = 0;
            int tid = intern(t.g, s);
            if (s) row.push_back({tid, s * t.c2});
        }
        std::sort(row.begin(), row.end());
        Row merged;
        for (auto& [i, c] : row) {
            if (!merged.empty() && merged.back().first == i) merged.back().second += c;
            else merged.push_back({i, c});
        }
        Row out;
        for (auto& ic : merged)
            if (ic.second != 0) out.push_back(ic);
        rows_[id] = std::move(out);
        done_[id] = 1;
        ++rows_done_;
        return rows_[id];
    }

    Prof p_;
    int policy_;
    Interner keys_;
    std::vector<Row> rows_;
    std::vector<char> done_;
    int64_t rows_done_ = 0;
    int64_t labeled_ = 0;
};

}  // namespace

PYBIND11_MODULE(_kernel, mod) {
    mod.doc() = "Native evaluator for the square of the hairy differential";
    mod.def("delta_terms", &py_delta_terms, "Labeled differential terms with doubled coefficients, for graphs that are nonzero");
    mod.def("canonical", &py_canonical, "Canonical form and sign");
    py::class_<DeltaSquared>(mod, "DeltaSquared")
        .def(py::init<int, int, int>(), py::arg("m"), py::arg("n"), py::arg("policy"))
        .def("check", &DeltaSquared::check, "Nonzero terms of delta squared, coefficients scaled by 4")
        .def("clear", &DeltaSquared::clear)
        .def("stats", &DeltaSquared::stats);
}
