"""Parse, compare, and canonicalize CPE 2.3 configuration names."""

from threatgraph import compare_versions, parse_cpe23, vendor_product

name = parse_cpe23("cpe:2.3:a:google:chrome:10.0.648.126:*:*:*:*:*:*:*")
print("part:", name.part.text)
print("vendor/product:", vendor_product(name))
print("version:", name.version.text)
print("canonical:", name.to_string())

# backslash escapes carry literal *, ?, : and \ inside values
escaped = parse_cpe23(r"cpe:2.3:a:acme:my\*tool:1.0:-:*:*:*:*:*:*")
print("\nescaped product:", escaped.product.text)
print("update is n/a:", escaped.update.is_na)
print("round-trips to:", escaped.to_string())

# dotted versions compare numerically segment by segment
for a, b in [("10.0.648.126", "10.0.648.127"),
             ("1.10", "1.9"),
             ("1.0", "1.0.1"),
             ("2.0", "2.0")]:
    sign = {-1: "<", 0: "=", 1: ">"}[compare_versions(a, b)]
    print(f"{a} {sign} {b}")
