import keys

print(keys.VERSION)
