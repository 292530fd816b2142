var balance = 5;
balance += 3;
