use soas::signature::{parse_spec, Sort};
use soas::term::{parse_term, MCtx};
fn main() {
    let stlc = "
type
  N : 0-ary
  _=>_ : 2-ary | r30
term
  app : (a => b) a -> b | _$_ l20
  lam : a.b -> a => b | λ_ r10
  ze : -> N
  su : N -> N
";
    let sig = parse_spec(stlc).unwrap();
    let nat = Sort::base("N");
    for text in ["(lam(x. x) : N => N) $ su(ze)",
                 "(lam(x. lam(y. x)) : N => N => N) $ ze $ su(ze)",
                 "(lam(y. ze) : N => N) $ su(ze)"] {
        match parse_term(&sig, &MCtx::empty(), &vec![], text, Some(&nat)) {
            Ok(t) => println!("OK  {text}\n -> {t:?}\n"),
            Err(e) => println!("ERR {text}\n -> {e}\n"),
        }
    }
}
