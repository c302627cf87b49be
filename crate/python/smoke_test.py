"""Smoke test for the isoscope extension module.

Build with `cargo build --release -p isoscope-py`, then copy
target/release/libisoscope_py.so to isoscope.so somewhere on PYTHONPATH.
"""

import math

import isoscope

GOLD = """\
1\tThe\tthe\tDET\t_\t_\t2\tdet\t_\t_
2\tdog\tdog\tNOUN\t_\t_\t3\tnsubj\t_\t_
3\tbarks\tbark\tVERB\t_\t_\t0\troot\t_\t_
4\tloudly\tloudly\tADV\t_\t_\t3\tadvmod\t_\t_

"""

PRED = GOLD.replace("\tdet\t", "\tamod\t").replace("4\tloudly\tloudly\tADV\t_\t_\t3", "4\tloudly\tloudly\tADV\t_\t_\t2")


def main():
    assert isoscope.count_rooted_trees(5) == 9
    assert isoscope.count_rooted_trees(20) == 12826228
    assert isoscope.count_rooted_trees(60) > 2**64

    assert isoscope.canon_code([0, 1, 1]) == isoscope.canon_code([2, 0, 2])
    assert isoscope.canon_code([0, 1, 2], "undirected") == isoscope.canon_code([2, 0, 2], "undirected")
    assert isoscope.canon_code([0, 1, 2]) != isoscope.canon_code([2, 0, 2])
    assert isoscope.is_isomorphic_bruteforce([0, 1, 1], [3, 3, 0])

    gold = isoscope.Treebank.parse(GOLD, "gold")
    pred = isoscope.Treebank.parse(PRED, "pred")
    assert len(gold) == 1 and gold.heads() == [[2, 3, 0, 3]]
    assert gold.to_conllu() == GOLD
    assert isoscope.las(gold, gold) == (4, 4, 1.0)
    assert isoscope.las(gold, pred)[2] == 0.5

    train = isoscope.Treebank.from_heads([[0, 1, 1], [2, 0], [0, 1, 2, 3]])
    test = isoscope.Treebank.from_heads([[3, 3, 0], [0, 1, 2]])
    report = isoscope.dug(train, test)
    assert report == {"dug": 0.5, "n_train": 3, "n_test": 2, "n_train_shapes": 3}
    assert isoscope.uug(train, test) == 1.0

    rho, p = isoscope.spearman([1, 2, 3, 4, 5], [2, 1, 4, 3, 5])
    assert abs(rho - 0.8) < 1e-12 and 0 < p < 1
    x = [float(i % 7) for i in range(40)]
    y = [v + (i % 3) for i, v in enumerate(x)]
    z = [float(i % 5) for i in range(40)]
    prho, _ = isoscope.partial_spearman(x, y, [z])
    assert -1 <= prho <= 1

    intercept, coefs = isoscope.ols([[0, 1, 2, 3, 4]], [1, 3, 5, 7, 9])
    assert abs(intercept - 1) < 1e-12 and abs(coefs[0] - 2) < 1e-12
    assert isoscope.explained_variance([0, 1], [1, 0]) == -3.0
    assert isoscope.kfold_indices(7, 3) == [[0, 1, 2], [3, 4], [5, 6]]
    feats = [[float(i) for i in range(30)]]
    assert isoscope.kfold_cv_explained_variance(feats, [2 * v + 1 for v in feats[0]]) > 0.999

    pool = isoscope.Treebank.from_heads([[0] + list(range(1, 12))] * 1300)
    train_set, tests, discarded = isoscope.sample_controlled_splits(pool, seed=1)
    assert len(train_set) == 1000 and [len(t) for t in tests] == [200] and discarded == 100

    rows = ["name,train_size,mean_test_len,dug,las"]
    for i in range(12):
        size = 100 * (i + 1) ** 2
        rows.append(f"tb{i:02},{size},{10 + (i * 7) % 11},{0.2 + 0.05 * ((i * 5) % 9)},{0.5 + 0.03 * math.log(size)}")
    files = isoscope.analyze_records("\n".join(rows) + "\n", tables=[2], figures=[1])
    assert sorted(files) == ["figure1.csv", "table2.csv"]
    assert files["table2.csv"].startswith("x,y,controls,rho,p_value,n,df,significant\n")

    try:
        isoscope.Treebank.parse("1\tx\tx\tX\t_\t_\t9\tdep\t_\t_\n\n")
    except ValueError as e:
        assert "line 1" in str(e)
    else:
        raise AssertionError("malformed CoNLL-U accepted")

    print("isoscope smoke test passed")


if __name__ == "__main__":
    main()
