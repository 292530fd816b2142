var makeMint = () => {
  var m = WeakMap();
  var makePurse = () => mint(0);
  var mint = balance => {
    var purse = def({
      getBalance: () => balance,
      makePurse: makePurse,
      deposit:
       (amount, srcP) => Q(srcP).then(src => {
         Nat(balance + amount);
         m.get(src)(Nat(amount));
         balance += amount;
       })
    });
    var decr = amount => {
      balance = Nat(balance - amount);
    };
    m.set(purse, decr);
    return purse;
  };
  return mint;
};
