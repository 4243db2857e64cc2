const express = require('express');
const bignum = require('bignum');
const app = express();
const base = bignum('12345678901234567890');
const modulus = bignum('98765432109876543210');

app.get('/pow', (req, res) => {
  let exponent = req.query.e;
  const result = base.powm(modulus, exponent);
  res.send(result.toString());
});
