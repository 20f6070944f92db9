"""
Rank the places where a method is most likely missing a branch
==============================================================

With both models trained, the recommender scores every edge of an unseen
method's control flow graph: "how much does this look like the edges that
historically received a new if-block?" and, per site, "which statement
kinds would that block contain?".
"""

from flowgap import TrainConfig, generate_synthetic, recommend, train_task

# Train on the planted synthetic corpus; see demo 04 for what it encodes.
rows = generate_synthetic(n=200, seed=0)
config = TrainConfig(hidden=32, epochs=200)
edge_model, _ = train_task(rows, "level1", config)
kinds_model, _ = train_task(rows, "level2", config)
print(f"trained both models on {len(rows)} examples")

# A method the models never saw. Note the unguarded parameter use.
METHOD = '''
def apply_discount(self, order, rate):
    price = order.total
    discounted = price - price * rate
    self.audit.append(discounted)
    return discounted
'''

result = recommend(METHOD, edge_model, kinds_model, top_k=3)
print(f"\nmethod {result['method']}: "
      f"{result['n_nodes']} nodes, {result['n_edges']} edges")

for rank, site in enumerate(result["candidates"], start=1):
    src, dst = site["edge"]
    print(f"\n#{rank}  edge {src} -> {dst}  score {site['score']:.3f}")
    print(f"    between lines {site['src_span']} and {site['dst_span']}")
    top_kinds = ", ".join(
        f"{k['kind']}={k['score']:.2f}" for k in site["kinds"][:3]
    )
    print(f"    likely block contents: {top_kinds}")
